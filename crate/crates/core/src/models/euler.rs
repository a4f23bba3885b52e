//! Compressible Euler equations for an ideal gas.
//!
//! Conservative layout is `[ρ, ρu, (ρv,) E]`; the number of momentum
//! components is `NC - 2`.

use super::ConservationLaw;
use crate::error::{Result, SolverError};
use crate::operators::Axis;

/// Ideal-gas closure `p = (γ - 1)(E - ½ρ|u|²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdealGas {
    pub gamma: f64,
}

impl IdealGas {
    pub fn new(gamma: f64) -> Self {
        IdealGas { gamma }
    }

    pub fn density(&self, u: &[f64]) -> f64 {
        u[0]
    }

    fn momentum<'a>(&self, u: &'a [f64]) -> &'a [f64] {
        &u[1..u.len() - 1]
    }

    pub fn total_energy(&self, u: &[f64]) -> f64 {
        u[u.len() - 1]
    }

    pub fn kinetic_energy(&self, u: &[f64]) -> f64 {
        let m2: f64 = self.momentum(u).iter().map(|m| m * m).sum();
        0.5 * m2 / u[0]
    }

    /// Internal energy per unit volume, `ρe`.
    pub fn internal_energy(&self, u: &[f64]) -> f64 {
        self.total_energy(u) - self.kinetic_energy(u)
    }

    pub fn pressure(&self, u: &[f64]) -> f64 {
        (self.gamma - 1.0) * self.internal_energy(u)
    }

    pub fn sound_speed(&self, u: &[f64]) -> f64 {
        (self.gamma * self.pressure(u) / u[0]).sqrt()
    }

    /// Physical entropy `s = log(p ρ^-γ)`.
    pub fn physical_entropy(&self, u: &[f64]) -> f64 {
        self.pressure(u).ln() - self.gamma * u[0].ln()
    }

    /// Modified specific entropy `φ = ρ^(1-γ) e`.
    pub fn phi(&self, u: &[f64]) -> f64 {
        u[0].powf(-self.gamma) * self.internal_energy(u)
    }

    pub fn is_admissible(&self, u: &[f64]) -> bool {
        let rho = u[0];
        rho > 0.0 && rho.is_finite() && {
            let rhoe = self.internal_energy(u);
            rhoe > 0.0 && rhoe.is_finite()
        }
    }

    fn check(&self, u: &[f64]) -> Result<()> {
        if self.is_admissible(u) {
            Ok(())
        } else {
            Err(SolverError::InadmissibleState { state: u.to_vec() })
        }
    }

    fn flux_into(&self, u: &[f64], axis: usize, out: &mut [f64]) {
        let rho = u[0];
        let m = self.momentum(u);
        let p = self.pressure(u);
        let un = m[axis] / rho;
        out[0] = m[axis];
        for (d, md) in m.iter().enumerate() {
            out[1 + d] = md * un + if d == axis { p } else { 0.0 };
        }
        out[u.len() - 1] = un * (self.total_energy(u) + p);
    }

    fn entropy_variables_into(&self, u: &[f64], out: &mut [f64]) {
        let rho = u[0];
        let p = self.pressure(u);
        let s = self.physical_entropy(u);
        let m = self.momentum(u);
        let m2: f64 = m.iter().map(|x| x * x).sum();
        let g1 = self.gamma - 1.0;
        out[0] = self.gamma - s - 0.5 * g1 * m2 / (rho * p);
        for (d, md) in m.iter().enumerate() {
            out[1 + d] = g1 * md / p;
        }
        out[u.len() - 1] = -g1 * rho / p;
    }

    /// Mathematical entropy `η = -ρ s`.
    fn entropy(&self, u: &[f64]) -> f64 {
        -u[0] * self.physical_entropy(u)
    }

    fn normal_speed(&self, u: &[f64], normal: [f64; 2]) -> f64 {
        let un: f64 = self
            .momentum(u)
            .iter()
            .zip(normal.iter())
            .map(|(m, n)| m * n)
            .sum::<f64>()
            / u[0];
        un.abs() + self.sound_speed(u)
    }

    fn davis(&self, ul: &[f64], ur: &[f64], normal: [f64; 2]) -> f64 {
        self.normal_speed(ul, normal)
            .max(self.normal_speed(ur, normal))
    }
}

/// Convert `[ρ, u, (v,) p]` to conservative variables.
pub fn conservative_from_primitive<const NC: usize>(gas: &IdealGas, w: &[f64; NC]) -> [f64; NC] {
    let rho = w[0];
    let mut u = [0.0; NC];
    u[0] = rho;
    let mut kinetic = 0.0;
    for d in 1..NC - 1 {
        u[d] = rho * w[d];
        kinetic += 0.5 * rho * w[d] * w[d];
    }
    u[NC - 1] = w[NC - 1] / (gas.gamma - 1.0) + kinetic;
    u
}

/// Convert conservative variables to `[ρ, u, (v,) p]`.
pub fn primitive_from_conservative<const NC: usize>(gas: &IdealGas, u: &[f64; NC]) -> [f64; NC] {
    let mut w = [0.0; NC];
    w[0] = u[0];
    for d in 1..NC - 1 {
        w[d] = u[d] / u[0];
    }
    w[NC - 1] = gas.pressure(u);
    w
}

/// Physical flux along `axis`.
pub fn euler_flux<const NC: usize>(gas: &IdealGas, u: &[f64; NC], axis: Axis) -> Result<[f64; NC]> {
    gas.check(u)?;
    if axis.index() >= NC - 2 {
        return Err(SolverError::Contract(format!(
            "axis {axis:?} out of range for {} momentum components",
            NC - 2
        )));
    }
    let mut f = [0.0; NC];
    gas.flux_into(u, axis.index(), &mut f);
    Ok(f)
}

/// Entropy `η`, entropy variables `v` and entropy potentials `ψ_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyQuantities<const NC: usize> {
    pub eta: f64,
    pub v: [f64; NC],
    /// One potential per momentum direction; unused entries are zero.
    pub psi: [f64; 2],
}

pub fn euler_entropy_quantities<const NC: usize>(
    gas: &IdealGas,
    u: &[f64; NC],
) -> Result<EntropyQuantities<NC>> {
    gas.check(u)?;
    let mut v = [0.0; NC];
    gas.entropy_variables_into(u, &mut v);
    let mut psi = [0.0; 2];
    for d in 0..NC - 2 {
        psi[d] = (gas.gamma - 1.0) * u[1 + d];
    }
    Ok(EntropyQuantities {
        eta: gas.entropy(u),
        v,
        psi,
    })
}

/// Davis estimate `max(|uL·n| + cL, |uR·n| + cR)`.
pub fn davis_wavespeed<const NC: usize>(
    gas: &IdealGas,
    ul: &[f64; NC],
    ur: &[f64; NC],
    normal: [f64; 2],
) -> Result<f64> {
    gas.check(ul)?;
    gas.check(ur)?;
    Ok(gas.davis(ul, ur, normal))
}

/// `φ = ρ^(1-γ) e`.
pub fn specific_entropy_phi<const NC: usize>(gas: &IdealGas, u: &[f64; NC]) -> Result<f64> {
    if !(u[0] > 0.0) {
        return Err(SolverError::InadmissibleState { state: u.to_vec() });
    }
    Ok(gas.phi(u))
}

/// One-dimensional Euler equations, `[ρ, ρu, E]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Euler1d {
    pub ideal: IdealGas,
}

/// Two-dimensional Euler equations, `[ρ, ρu, ρv, E]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Euler2d {
    pub ideal: IdealGas,
}

impl Euler1d {
    pub fn new(gamma: f64) -> Self {
        Euler1d {
            ideal: IdealGas::new(gamma),
        }
    }
}

impl Euler2d {
    pub fn new(gamma: f64) -> Self {
        Euler2d {
            ideal: IdealGas::new(gamma),
        }
    }
}

macro_rules! impl_euler {
    ($ty:ty, $nc:literal, $dim:literal, $names:expr) => {
        impl ConservationLaw<$nc> for $ty {
            const DIM: usize = $dim;

            fn flux(&self, u: &[f64; $nc], axis: Axis) -> [f64; $nc] {
                let mut f = [0.0; $nc];
                self.ideal.flux_into(u, axis.index(), &mut f);
                f
            }

            fn max_wavespeed(&self, ul: &[f64; $nc], ur: &[f64; $nc], normal: [f64; 2]) -> f64 {
                self.ideal.davis(ul, ur, normal)
            }

            fn entropy(&self, u: &[f64; $nc]) -> f64 {
                self.ideal.entropy(u)
            }

            fn entropy_variables(&self, u: &[f64; $nc]) -> [f64; $nc] {
                let mut v = [0.0; $nc];
                self.ideal.entropy_variables_into(u, &mut v);
                v
            }

            fn entropy_potential(&self, u: &[f64; $nc], axis: Axis) -> f64 {
                (self.ideal.gamma - 1.0) * u[1 + axis.index()]
            }

            fn is_admissible(&self, u: &[f64; $nc]) -> bool {
                self.ideal.is_admissible(u)
            }

            fn gas(&self) -> Option<IdealGas> {
                Some(self.ideal)
            }

            fn component_names(&self) -> &'static [&'static str] {
                $names
            }
        }
    };
}

impl_euler!(Euler1d, 3, 1, &["rho", "rhou", "E"]);
impl_euler!(Euler2d, 4, 2, &["rho", "rhou", "rhov", "E"]);

#[cfg(test)]
mod tests {
    use super::*;

    const GAS: IdealGas = IdealGas { gamma: 1.4 };

    #[test]
    fn rest_state_flux() {
        let u = conservative_from_primitive(&GAS, &[1.0, 0.0, 0.0, 1.0]);
        let f = euler_flux(&GAS, &u, Axis::X).unwrap();
        assert_eq!(f, [0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn moving_state_flux() {
        let u = conservative_from_primitive(&GAS, &[1.0, 1.0, 0.0, 1.0]);
        assert!((u[3] - 3.0).abs() < 1e-15);
        let f = euler_flux(&GAS, &u, Axis::X).unwrap();
        for (a, b) in f.iter().zip([1.0, 2.0, 0.0, 4.0]) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn flux_rotation() {
        let u = conservative_from_primitive(&GAS, &[0.8, 0.3, -1.1, 2.0]);
        let swapped = [u[0], u[2], u[1], u[3]];
        let fy = euler_flux(&GAS, &u, Axis::Y).unwrap();
        let fx = euler_flux(&GAS, &swapped, Axis::X).unwrap();
        let fx_swapped = [fx[0], fx[2], fx[1], fx[3]];
        for c in 0..4 {
            assert!((fy[c] - fx_swapped[c]).abs() < 1e-14);
        }
    }

    #[test]
    fn inadmissible_flux_reports_state() {
        let err = euler_flux(&GAS, &[1.0, 0.0, 0.0, -1.0], Axis::X).unwrap_err();
        match err {
            SolverError::InadmissibleState { state } => assert_eq!(state, vec![1.0, 0.0, 0.0, -1.0]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn potential_read_off() {
        // ρu = 2, ρv = 3 with ρ = 1, p = 1
        let u = [1.0, 2.0, 3.0, 1.0 / 0.4 + 0.5 * 13.0];
        let q = euler_entropy_quantities(&GAS, &u).unwrap();
        assert!((q.psi[0] - 0.8).abs() < 1e-14);
        assert!((q.psi[1] - 1.2).abs() < 1e-14);
        let rest = conservative_from_primitive(&GAS, &[1.0, 0.0, 0.0, 1.0]);
        assert_eq!(euler_entropy_quantities(&GAS, &rest).unwrap().psi, [0.0, 0.0]);
    }

    #[test]
    fn entropy_variables_match_finite_differences() {
        let u = conservative_from_primitive(&GAS, &[1.2, 0.3, -0.2, 0.9]);
        let q = euler_entropy_quantities(&GAS, &u).unwrap();
        let h = 1e-6;
        for c in 0..4 {
            let mut up = u;
            let mut um = u;
            up[c] += h;
            um[c] -= h;
            let fd = (GAS.entropy(&up) - GAS.entropy(&um)) / (2.0 * h);
            assert!((fd - q.v[c]).abs() < 1e-6, "component {c}: {fd} vs {}", q.v[c]);
        }
    }

    #[test]
    fn potential_is_entropy_flux_complement() {
        // ψ_x = v^T f_x - F_x with F_x = η u
        let u = conservative_from_primitive(&GAS, &[0.7, -0.4, 0.25, 1.3]);
        let q = euler_entropy_quantities(&GAS, &u).unwrap();
        for axis in Axis::ALL {
            let f = euler_flux(&GAS, &u, axis).unwrap();
            let vf: f64 = q.v.iter().zip(f.iter()).map(|(a, b)| a * b).sum();
            let big_f = q.eta * u[1 + axis.index()] / u[0];
            let diff = vf - big_f - q.psi[axis.index()];
            assert!(diff.abs() < 1e-12 * vf.abs().max(1.0), "{diff:e}");
        }
    }

    #[test]
    fn davis_values() {
        let rest = conservative_from_primitive(&GAS, &[1.0, 0.0, 0.0, 1.0]);
        let l = davis_wavespeed(&GAS, &rest, &rest, [1.0, 0.0]).unwrap();
        assert!((l - 1.4f64.sqrt()).abs() < 1e-15);

        let a = conservative_from_primitive(&GAS, &[1.0, 0.5, 0.0, 1.0]);
        let b = conservative_from_primitive(&GAS, &[1.0, -0.5, 0.0, 1.0]);
        assert_eq!(
            davis_wavespeed(&GAS, &a, &b, [1.0, 0.0]).unwrap(),
            davis_wavespeed(&GAS, &b, &a, [1.0, 0.0]).unwrap()
        );

        let jet_gas = IdealGas::new(5.0 / 3.0);
        let jet = conservative_from_primitive(&jet_gas, &[5.0, 800.0, 0.0, 0.4127]);
        let l = davis_wavespeed(&jet_gas, &jet, &jet, [1.0, 0.0]).unwrap();
        let expected = 800.0 + (5.0 / 3.0 * 0.4127 / 5.0f64).sqrt();
        assert!((l - expected).abs() < 1e-9);
        assert!((l - 800.371).abs() < 1e-3);
    }

    #[test]
    fn phi_values() {
        // ρ = 1, e = 1
        let u = [1.0, 0.0, 0.0, 1.0];
        assert!((specific_entropy_phi(&GAS, &u).unwrap() - 1.0).abs() < 1e-15);
        let u = conservative_from_primitive(&GAS, &[2.0, 0.0, 0.0, 2.0]);
        let phi = specific_entropy_phi(&GAS, &u).unwrap();
        assert!((phi - 2f64.powf(-0.4) * 2.5).abs() < 1e-14);
        assert!((phi - 1.89465).abs() < 1e-5);
        assert!(specific_entropy_phi(&GAS, &[0.0, 0.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn phi_isentropic_scaling() {
        let base = [0.9, 0.3, -0.1, 1.7];
        let phi0 = GAS.phi(&conservative_from_primitive(&GAS, &base));
        for lambda in [0.1, 0.5, 2.0, 7.0] {
            let scaled = [
                lambda * base[0],
                base[1],
                base[2],
                lambda.powf(GAS.gamma) * base[3],
            ];
            let phi = GAS.phi(&conservative_from_primitive(&GAS, &scaled));
            assert!((phi - phi0).abs() < 1e-12 * phi0.abs().max(1.0));
        }
    }

    #[test]
    fn primitive_round_trip() {
        let w = [1.3, -0.2, 0.45, 0.77];
        let u = conservative_from_primitive(&GAS, &w);
        let back = conservative_from_primitive(&GAS, &primitive_from_conservative(&GAS, &u));
        for c in 0..4 {
            assert!((u[c] - back[c]).abs() < 1e-14);
        }
    }
}

//! Free spreading of a Laguerre–Gaussian packet between the source and the
//! lens, and the matched state handed to the in-field dynamics.

use crate::constants::{diffraction_scales, Kinematics};
use crate::error::{require_finite, require_positive, Error, Result};
use crate::scalar::{lit, Real};

/// Quantum numbers and waist of the packet at the source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSpec<T> {
    /// Radial quantum number.
    pub n: u32,
    /// Orbital angular momentum (signed).
    pub l: i32,
    /// Waist dispersion σ_w [m].
    pub sigma_w: T,
}

impl<T: Real> BeamSpec<T> {
    pub fn new(n: u32, l: i32, sigma_w: T) -> Result<Self> {
        require_positive("waist dispersion σ_w [m]", sigma_w)?;
        Ok(Self { n, l, sigma_w })
    }

    pub fn abs_l(&self) -> u32 {
        self.l.unsigned_abs()
    }

    /// 2n + |l| + 1.
    pub fn mode_factor(&self) -> T {
        lit((2 * self.n as u64 + self.abs_l() as u64 + 1) as f64)
    }

    /// 2n + |l| + l + 1, the bracket of the Landau energy.
    pub fn landau_factor(&self) -> T {
        lit((2 * self.n as i64 + self.abs_l() as i64 + self.l as i64 + 1) as f64)
    }

    /// r.m.s. radius at the waist, σ_w·sqrt(2n+|l|+1).
    pub fn rho_w(&self) -> T {
        self.sigma_w * self.mode_factor().sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry<T> {
    /// Source-to-boundary distance |z₀ − z_g| [m].
    pub distance: T,
    /// Boundary position [m].
    pub z0: T,
}

impl<T: Real> Geometry<T> {
    pub fn new(distance: T, z0: T) -> Result<Self> {
        let distance = require_finite("source-to-boundary distance [m]", distance)?;
        if distance < T::zero() {
            return Err(Error::domain(
                "source-to-boundary distance [m]",
                distance,
                "must be ≥ 0",
            ));
        }
        Ok(Self {
            distance,
            z0: require_finite("boundary position [m]", z0)?,
        })
    }
}

/// Radius, dispersion and their `ct`-rates at the lens entrance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryState<T> {
    pub rho0: T,
    /// dρ/d(ct) at the boundary.
    pub rho0_rate: T,
    pub sigma0: T,
    /// dσ/d(ct) at the boundary.
    pub sigma0_rate: T,
    /// dρ/dz = ρ₀′/β.
    pub drho_dz: T,
}

/// ρ_w·sqrt(1 + (Δt/τ_d)²). Only the ratio of the two times matters, so any
/// consistent unit works.
pub fn free_rms_radius<T: Real>(beam: &BeamSpec<T>, tau_d: T, dt: T) -> Result<T> {
    let tau_d = require_positive("diffraction time τ_d", tau_d)?;
    let dt = require_finite("elapsed time", dt)?;
    let u = dt / tau_d;
    Ok(beam.rho_w() * (T::one() + u * u).sqrt())
}

/// dρ/dz of the free packet a flight distance `z` past its waist.
pub fn free_divergence<T: Real>(beam: &BeamSpec<T>, rayleigh_length: T, z: T) -> Result<T> {
    let z_r = require_positive("Rayleigh length z_R [m]", rayleigh_length)?;
    let z = require_finite("flight distance [m]", z)?;
    if z < T::zero() {
        return Err(Error::domain("flight distance [m]", z, "must be ≥ 0"));
    }
    let u = z / z_r;
    Ok(beam.rho_w() * u / (z_r * (T::one() + u * u).sqrt()))
}

/// Matched boundary state for a packet that leaves its waist `geom.distance`
/// upstream of the lens.
pub fn boundary_state<T: Real>(
    beam: &BeamSpec<T>,
    geom: &Geometry<T>,
    kin: &Kinematics<T>,
) -> Result<BoundaryState<T>> {
    let scales = diffraction_scales(beam.sigma_w, kin.beta)?;
    boundary_state_with_rayleigh(beam, geom.distance, kin.beta, scales.rayleigh_length)
}

/// Same as [`boundary_state`] with an explicit Rayleigh length, for callers
/// that pin the diffraction time to a quoted value.
pub fn boundary_state_with_rayleigh<T: Real>(
    beam: &BeamSpec<T>,
    distance: T,
    beta: T,
    rayleigh_length: T,
) -> Result<BoundaryState<T>> {
    let z_r = require_positive("Rayleigh length z_R [m]", rayleigh_length)?;
    // d/(βc) over τ_d is d/z_R
    let rho0 = free_rms_radius(beam, z_r, distance)?;
    let drho_dz = free_divergence(beam, z_r, distance)?;
    let rho0_rate = beta * drho_dz;
    let root = beam.mode_factor().sqrt();
    Ok(BoundaryState {
        rho0,
        rho0_rate,
        sigma0: rho0 / root,
        sigma0_rate: rho0_rate / root,
        drho_dz,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::beta_from_kinetic_energy;
    use proptest::prelude::*;

    fn beam() -> BeamSpec<f64> {
        BeamSpec::new(0, 3, 1e-6).unwrap()
    }

    #[test]
    fn waist_ratio_is_exact() {
        let b = BeamSpec::new(2, -5, 3e-7_f64).unwrap();
        assert_eq!(b.mode_factor(), 10.0);
        assert!((b.rho_w() / b.sigma_w - 10f64.sqrt()).abs() < 1e-15);
        assert_eq!(beam().rho_w(), 2e-6);
        assert!(BeamSpec::new(0, 0, 0.0_f64).is_err());
    }

    #[test]
    fn free_radius_examples() {
        let b = beam();
        assert_eq!(free_rms_radius(&b, 8.6e-9, 0.0).unwrap(), 2e-6);
        let r = free_rms_radius(&b, 8.6e-9, 8.6e-9).unwrap();
        assert!((r - 2e-6 * 2f64.sqrt()).abs() < 1e-18);
        assert!((r - 2.82e-6).abs() < 0.01e-6);
        let r2 = free_rms_radius(&b, 1.0, 2.0).unwrap();
        assert!((r2 - 2e-6 * 5f64.sqrt()).abs() < 1e-18);
        assert!(free_rms_radius(&b, 0.0, 1.0).is_err());
    }

    #[test]
    fn divergence_examples() {
        let b = beam();
        assert_eq!(free_divergence(&b, 0.163, 0.0).unwrap(), 0.0);
        let sem = free_divergence(&b, 0.163, 0.163).unwrap();
        assert!((sem - 8.68e-6).abs() < 0.01e-6, "{sem}");
        let tem = free_divergence(&b, 1.79, 0.10).unwrap();
        assert!((tem - 62.3e-9).abs() < 0.1e-9, "{tem}");
        assert!(free_divergence(&b, 0.0, 0.1).is_err());
    }

    #[test]
    fn boundary_rows() {
        let b = beam();
        let med = beta_from_kinetic_energy(1e6).unwrap();
        let s = boundary_state(&b, &Geometry::new(0.10, 0.10).unwrap(), &med).unwrap();
        assert!((s.rho0 - 2.00e-6).abs() < 0.01e-6);
        assert!((s.drho_dz - 0.34e-9 / 1e-2).abs() < 0.01e-7);
        let linac = beta_from_kinetic_energy(1e9).unwrap();
        let s = boundary_state(&b, &Geometry::new(1.0, 1.0).unwrap(), &linac).unwrap();
        assert!((s.rho0 - 2.14e-6).abs() < 0.01e-6);
        assert!((s.drho_dz - 0.28e-6).abs() < 0.005e-6);
        assert!((s.sigma0 * 2.0 - s.rho0).abs() < 1e-20);
        assert!((s.sigma0_rate * 2.0 - s.rho0_rate).abs() < 1e-22);
    }

    #[test]
    fn waist_at_boundary() {
        let b = BeamSpec::new(3, -2, 0.5e-6).unwrap();
        let kin = beta_from_kinetic_energy(3e4).unwrap();
        let s = boundary_state(&b, &Geometry::new(0.0, 0.0).unwrap(), &kin).unwrap();
        assert_eq!(s.rho0, b.rho_w());
        assert_eq!(s.sigma0_rate, 0.0);
        assert!(Geometry::new(-1.0_f64, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn spreading_identity(dt in -10.0..10.0f64, tau in 0.1..5.0f64, sw in 1e-8..1e-5f64) {
            let b = BeamSpec::new(1, 2, sw).unwrap();
            let r = free_rms_radius(&b, tau, dt).unwrap();
            let rhs = b.rho_w().powi(2) + (b.rho_w() * dt / tau).powi(2);
            prop_assert!((r * r - rhs).abs() <= 1e-14 * rhs);
            prop_assert_eq!(r, free_rms_radius(&b, tau, -dt).unwrap());
        }

        #[test]
        fn divergence_monotone_towards_far_field(z in 0.0..50.0f64, zr in 0.05..3.0f64) {
            let b = beam();
            let a = free_divergence(&b, zr, z).unwrap();
            let c = free_divergence(&b, zr, z * 1.01 + 1e-6).unwrap();
            prop_assert!(c > a);
            prop_assert!(c < b.rho_w() / zr);
        }

        #[test]
        fn waist_boundary_has_zero_rate(n in 0u32..6, l in -8i32..8, sw in 1e-8..1e-5f64, e in 10.0..1e9f64) {
            let b = BeamSpec::new(n, l, sw).unwrap();
            let kin = beta_from_kinetic_energy(e).unwrap();
            let s = boundary_state(&b, &Geometry::new(0.0, 0.0).unwrap(), &kin).unwrap();
            prop_assert_eq!(s.sigma0_rate, 0.0);
        }
    }

    #[test]
    fn far_field_asymptote() {
        let b = beam();
        let far = free_divergence(&b, 0.1, 1e4).unwrap();
        assert!(((far - b.rho_w() / 0.1) / far).abs() < 1e-9);
    }
}

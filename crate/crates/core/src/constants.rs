//! Physical constants, relativistic kinematics and the length/time scales
//! set by the solenoid field and by free diffraction.
//!
//! Time is carried as optical path `ct` in metres throughout the crate; every
//! rate (σ′, ρ′) is a dimensionless derivative with respect to `ct`.
//! Seconds only appear in fields whose name says so.

use crate::error::{require_finite, require_positive, Error, Result};
use crate::scalar::{lit, Real};

/// CODATA 2018 values. Kept as literals so golden outputs are bit-stable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants<T> {
    /// Reduced Compton wavelength ħ/(m_e c) [m].
    pub lambda_c: T,
    /// m_e c² [eV].
    pub electron_rest_energy: T,
    /// |e| [C].
    pub elementary_charge: T,
    /// ħ [J s].
    pub hbar: T,
    /// c [m/s].
    pub speed_of_light: T,
    /// m_e [kg].
    pub electron_mass: T,
}

impl<T: Real> Constants<T> {
    pub fn codata() -> Self {
        Self {
            lambda_c: lit(3.861_592_679_6e-13),
            electron_rest_energy: lit(510_998.95),
            elementary_charge: lit(1.602_176_634e-19),
            hbar: lit(1.054_571_817e-34),
            speed_of_light: lit(299_792_458.0),
            electron_mass: lit(9.109_383_701_5e-31),
        }
    }

    /// ħ/(m_e c) recomputed from the SI literals.
    pub fn lambda_c_from_si(&self) -> T {
        self.hbar / (self.electron_mass * self.speed_of_light)
    }

    /// Converts an energy in joules to electron-volts.
    pub fn joule_to_ev(&self, joules: T) -> T {
        joules / self.elementary_charge
    }
}

impl<T: Real> Default for Constants<T> {
    fn default() -> Self {
        Self::codata()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kinematics<T> {
    /// Kinetic energy [eV].
    pub kinetic_energy: T,
    /// v/c.
    pub beta: T,
    /// Lorentz factor.
    pub gamma: T,
}

/// Relativistic β and γ of an electron with the given kinetic energy [eV].
pub fn beta_from_kinetic_energy<T: Real>(energy_ev: T) -> Result<Kinematics<T>> {
    let energy_ev = require_positive("kinetic energy [eV]", energy_ev)?;
    let k = Constants::<T>::codata();
    let x = energy_ev / k.electron_rest_energy;
    let gamma = T::one() + x;
    // sqrt(1 - γ⁻²) rewritten to avoid cancellation at low energy
    let beta = (x * (x + lit(2.0))).sqrt() / gamma;
    Ok(Kinematics {
        kinetic_energy: energy_ev,
        beta,
        gamma,
    })
}

/// Scales set by a uniform longitudinal field.
///
/// `FieldScales::free()` is the ω → 0 limit (σ_L = ∞) used to run the
/// free-space dynamics through the same code paths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldScales<T> {
    /// |H| [T].
    pub field: T,
    /// Magnetic length sqrt(2ħ/|e|H) [m].
    pub sigma_l: T,
    /// ω/c [rad/m], the cyclotron frequency per metre of optical path.
    pub omega_per_meter: T,
    /// Cyclotron period T_c [s].
    pub cyclotron_period: T,
    pub constants: Constants<T>,
}

impl<T: Real> FieldScales<T> {
    pub fn free() -> Self {
        Self {
            field: T::zero(),
            sigma_l: T::infinity(),
            omega_per_meter: T::zero(),
            cyclotron_period: T::infinity(),
            constants: Constants::codata(),
        }
    }

    pub fn is_free(&self) -> bool {
        self.omega_per_meter == T::zero()
    }

    pub fn lambda_c(&self) -> T {
        self.constants.lambda_c
    }

    /// c·T_c [m].
    pub fn cyclotron_period_ct(&self) -> T {
        T::TAU() / self.omega_per_meter
    }

    /// ħω [eV].
    pub fn cyclotron_energy_ev(&self) -> T {
        let k = &self.constants;
        k.joule_to_ev(k.hbar * k.speed_of_light * self.omega_per_meter)
    }
}

/// Magnetic length, cyclotron frequency and period for a field of `field_tesla`.
pub fn field_scales<T: Real>(field_tesla: T) -> Result<FieldScales<T>> {
    let field = require_positive("magnetic field [T]", field_tesla)?;
    let k = Constants::<T>::codata();
    let sigma_l = (lit::<T>(2.0) * k.hbar / (k.elementary_charge * field)).sqrt();
    let omega_per_meter = lit::<T>(2.0) * k.lambda_c / (sigma_l * sigma_l);
    let cyclotron_period = T::TAU() / (k.speed_of_light * omega_per_meter);
    Ok(FieldScales {
        field,
        sigma_l,
        omega_per_meter,
        cyclotron_period,
        constants: k,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffractionScales<T> {
    /// τ_d = σ_w²/(λ_C c) [s].
    pub tau_d: T,
    /// z_R = βc τ_d [m].
    pub rayleigh_length: T,
}

pub fn diffraction_scales<T: Real>(sigma_w: T, beta: T) -> Result<DiffractionScales<T>> {
    let sigma_w = require_positive("waist dispersion σ_w [m]", sigma_w)?;
    let beta = require_finite("β", beta)?;
    if beta <= T::zero() || beta >= T::one() {
        return Err(Error::domain("β", beta, "must lie in (0, 1)"));
    }
    let k = Constants::<T>::codata();
    let tau_d = sigma_w * sigma_w / (k.lambda_c * k.speed_of_light);
    Ok(DiffractionScales {
        tau_d,
        rayleigh_length: beta * k.speed_of_light * tau_d,
    })
}

//! Diagnostics for the sudden-transfer and hard-edge approximations.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::constants::{Constants, FieldScales};
use crate::dynamics::mean_transverse_energy;
use crate::error::{require_finite, require_positive, Error, Result};
use crate::free_space::BeamSpec;
use crate::quadrature::{simpson, uniform_spacing};
use crate::scalar::{lit, to_f64, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Valid,
    Marginal,
    Violated,
}

impl Verdict {
    /// ≥ 100 valid, ≥ 10 marginal, otherwise violated.
    pub fn from_ratio(ratio: f64) -> Self {
        if ratio >= 100.0 {
            Verdict::Valid
        } else if ratio >= 10.0 {
            Verdict::Marginal
        } else {
            Verdict::Violated
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Valid => "valid",
            Verdict::Marginal => "marginal",
            Verdict::Violated => "violated",
        })
    }
}

/// Compares the packet crossing time σ_z/v with the diffraction time and the
/// cyclotron period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferCheck<T> {
    /// [s]
    pub tau_d: T,
    /// [s]
    pub cyclotron_period: T,
    /// σ_z/(βc) [s]
    pub crossing_time: T,
    pub ratio_d: T,
    pub ratio_c: T,
    pub verdict: Verdict,
}

pub fn transfer_time_check<T: Real>(
    beam: &BeamSpec<T>,
    scales: &FieldScales<T>,
    sigma_z: T,
    beta: T,
) -> Result<TransferCheck<T>> {
    let sigma_z = require_finite("packet length σ_z [m]", sigma_z)?;
    if sigma_z < T::zero() {
        return Err(Error::domain(
            "packet length σ_z [m]",
            sigma_z,
            "must be ≥ 0",
        ));
    }
    let beta = require_positive("β", beta)?;
    let k = &scales.constants;
    // ρ_w²/((2n+|l|+1)λ_C c) = σ_w²/(λ_C c)
    let tau_d = beam.sigma_w * beam.sigma_w / (k.lambda_c * k.speed_of_light);
    let crossing_time = sigma_z / (beta * k.speed_of_light);
    let ratio_d = tau_d / crossing_time;
    let ratio_c = scales.cyclotron_period / crossing_time;
    Ok(TransferCheck {
        tau_d,
        cyclotron_period: scales.cyclotron_period,
        crossing_time,
        ratio_d,
        ratio_c,
        verdict: Verdict::from_ratio(to_f64(ratio_d.min(ratio_c))),
    })
}

/// Regime of the longitudinal density tail across the boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceRegime<T> {
    /// 1: τ < ζ, τΛ < 1; 2: τ < ζ, τΛ > 1; 3: τ > ζ, τΛ < 1; 4: τ > ζ, τΛ > 1.
    pub regime: u8,
    /// ln of the density suppression.
    pub log_density_exponent: T,
}

pub const TIE_TOLERANCE: f64 = 1e-9;

/// Classifies (ζ, τ, Λ_C) into the four asymptotic regimes. Points within
/// the tie tolerance of a regime boundary take the candidate with the
/// smaller exponent magnitude.
pub fn space_regime<T: Real>(zeta: T, tau: T, lambda_c: T) -> Result<SpaceRegime<T>> {
    let zeta = require_finite("ζ", zeta)?;
    let tau = require_finite("τ", tau)?;
    if zeta < T::zero() || tau < T::zero() {
        return Err(Error::domain("ζ, τ", zeta.min(tau), "must be ≥ 0"));
    }
    if !(lambda_c > T::zero() && lambda_c < T::one()) {
        return Err(Error::domain("Λ_C", lambda_c, "must lie in (0, 1)"));
    }
    let tol: T = lit(TIE_TOLERANCE);
    let scale = T::one().max(tau).max(zeta);
    let late = tau * lambda_c;
    let time_sides: &[bool] = if (tau - zeta).abs() <= tol * scale {
        &[false, true]
    } else if tau > zeta {
        &[true]
    } else {
        &[false]
    };
    let spread_sides: &[bool] = if (late - T::one()).abs() <= tol {
        &[false, true]
    } else if late > T::one() {
        &[true]
    } else {
        &[false]
    };
    let mut best: Option<SpaceRegime<T>> = None;
    for &after in time_sides {
        for &spread in spread_sides {
            let (regime, exponent) = match (after, spread) {
                (false, false) => (1, -zeta * zeta),
                (false, true) => (2, -(zeta / late) * (zeta / late)),
                (true, false) => (3, -tau * tau),
                (true, true) => (4, -T::one() / (lambda_c * lambda_c)),
            };
            if best.is_none_or(|b| exponent.abs() < b.log_density_exponent.abs()) {
                best = Some(SpaceRegime {
                    regime,
                    log_density_exponent: exponent,
                });
            }
        }
    }
    Ok(best.expect("at least one candidate regime"))
}

/// On-axis field H̃_z(z) sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FringeProfile<T> {
    z: Vec<T>,
    field: Vec<T>,
    plateau: T,
    nominal_length: T,
}

impl<T: Real> FringeProfile<T> {
    /// `plateau` defaults to the profile maximum and `nominal_length` to the
    /// length over which H̃_z ≥ H/2.
    pub fn new(
        z: Vec<T>,
        field: Vec<T>,
        plateau: Option<T>,
        nominal_length: Option<T>,
    ) -> Result<Self> {
        if z.len() != field.len() {
            return Err(Error::Precondition(
                "z and H columns differ in length".into(),
            ));
        }
        if z.len() < 3 {
            return Err(Error::Precondition(format!(
                "fringe profile needs at least 3 samples, got {}",
                z.len()
            )));
        }
        let h = uniform_spacing(&z)?;
        if h <= T::zero() {
            return Err(Error::Precondition("z must increase".into()));
        }
        let peak = field.iter().cloned().fold(T::neg_infinity(), T::max);
        let plateau = match plateau {
            Some(p) => require_positive("plateau field H [T]", p)?,
            None => require_positive("plateau field H [T]", peak)?,
        };
        let ceiling = plateau * (T::one() + lit(1e-9));
        if let Some(bad) = field.iter().find(|&&b| !(b >= T::zero() && b <= ceiling)) {
            return Err(Error::domain(
                "fringe field sample [T]",
                *bad,
                "must lie in [0, H]",
            ));
        }
        let edge = lit::<T>(1e-3) * plateau;
        let last = field[field.len() - 1];
        if field[0] > edge || !(last <= edge || (plateau - last).abs() <= edge) {
            return Err(Error::Precondition(
                "profile must start at 0 and end at 0 or at the plateau".into(),
            ));
        }
        let mut profile = Self {
            z,
            field,
            plateau,
            nominal_length: T::zero(),
        };
        profile.nominal_length = match nominal_length {
            Some(d0) => require_positive("nominal length d0 [m]", d0)?,
            None => profile.half_maximum_length(),
        };
        Ok(profile)
    }

    /// Reads a two-column CSV (z [m], H_z [T]); a header row is skipped.
    pub fn from_csv(path: &Path, plateau: Option<T>, nominal_length: Option<T>) -> Result<Self> {
        let io = |e: &dyn std::fmt::Display| Error::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        };
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_path(path)
            .map_err(|e| io(&e))?;
        let (mut z, mut field) = (Vec::new(), Vec::new());
        for (row, record) in reader.records().enumerate() {
            let record = record.map_err(|e| io(&e))?;
            if record.len() < 2 {
                return Err(Error::Format(format!(
                    "row {} has fewer than 2 columns",
                    row + 1
                )));
            }
            let parsed = (record[0].parse::<f64>(), record[1].parse::<f64>());
            match parsed {
                (Ok(a), Ok(b)) => {
                    z.push(lit(a));
                    field.push(lit(b));
                }
                _ if row == 0 => continue,
                _ => {
                    return Err(Error::Format(format!(
                        "row {}: cannot parse `{}`, `{}`",
                        row + 1,
                        &record[0],
                        &record[1]
                    )))
                }
            }
        }
        Self::new(z, field, plateau, nominal_length)
    }

    pub fn plateau(&self) -> T {
        self.plateau
    }

    pub fn nominal_length(&self) -> T {
        self.nominal_length
    }

    /// True for an entrance-only profile that ends on the plateau.
    pub fn is_entrance_only(&self) -> bool {
        self.field[self.field.len() - 1] > self.plateau / lit(2.0)
    }

    fn half_maximum_length(&self) -> T {
        let half = self.plateau / lit(2.0);
        let crossing = |a: usize, b: usize| {
            let (fa, fb) = (self.field[a], self.field[b]);
            self.z[a] + (self.z[b] - self.z[a]) * (half - fa) / (fb - fa)
        };
        let n = self.z.len();
        let first = (1..n)
            .find(|&i| self.field[i] >= half)
            .map(|i| crossing(i - 1, i));
        let last = (1..n)
            .rev()
            .find(|&i| self.field[i - 1] >= half && self.field[i] < half);
        match (first, last) {
            (Some(a), Some(i)) => crossing(i - 1, i) - a,
            (Some(a), None) => self.z[n - 1] - a,
            _ => T::zero(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveLength<T> {
    /// ∫ (H̃_z/H)² dz [m].
    pub length: T,
    /// Displacement of each hard edge, (d − d0)/2 for a full solenoid and
    /// d − d0 for an entrance-only profile [m].
    pub boundary_shift: T,
}

pub fn effective_length<T: Real>(profile: &FringeProfile<T>) -> Result<EffectiveLength<T>> {
    let h = profile.z[1] - profile.z[0];
    let squared: Vec<T> = profile
        .field
        .iter()
        .map(|&b| (b / profile.plateau) * (b / profile.plateau))
        .collect();
    let length = simpson(&squared, h)?;
    let excess = length - profile.nominal_length;
    let boundary_shift = if profile.is_entrance_only() {
        excess
    } else {
        excess / lit(2.0)
    };
    Ok(EffectiveLength {
        length,
        boundary_shift,
    })
}

/// Both branches of the longitudinal energy change through the fringe field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FringeEnergy<T> {
    /// (|e|ρH)²/(8m_e) [eV].
    pub quadratic: T,
    /// |e|ρH v_φ⁰ c/2 [eV], sign dropped.
    pub linear: T,
    pub minus: T,
    pub plus: T,
}

/// `rho` [m], `field` [T], `v_phi0` in units of c.
pub fn fringe_energy_change<T: Real>(rho: T, field: T, v_phi0: T) -> Result<FringeEnergy<T>> {
    let rho = require_positive("radius ρ [m]", rho)?;
    let field = require_finite("field H [T]", field)?;
    if field < T::zero() {
        return Err(Error::domain("field H [T]", field, "must be ≥ 0"));
    }
    let v_phi0 = require_finite("v_φ⁰", v_phi0)?;
    let k = Constants::<T>::codata();
    let kick = k.elementary_charge * rho * field;
    let quadratic = k.joule_to_ev(kick * kick / (lit::<T>(8.0) * k.electron_mass));
    let linear = (rho * field * v_phi0 * k.speed_of_light / lit(2.0)).abs();
    Ok(FringeEnergy {
        quadratic,
        linear,
        minus: quadratic - linear,
        plus: quadratic + linear,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VphiEstimate<T> {
    /// λ_C σ_st/σ_L².
    pub estimate: T,
    /// sqrt(2⟨E⊥⟩/(m_e c²)).
    pub bound: T,
}

pub fn vphi_estimate<T: Real>(
    beam: &BeamSpec<T>,
    sigma_st: T,
    scales: &FieldScales<T>,
) -> Result<VphiEstimate<T>> {
    let sigma_st = require_positive("stationary dispersion σ_st [m]", sigma_st)?;
    if scales.is_free() {
        return Err(Error::Precondition(
            "azimuthal velocity estimate needs a field".into(),
        ));
    }
    let energy = mean_transverse_energy(beam, sigma_st, scales);
    Ok(VphiEstimate {
        estimate: scales.lambda_c() * sigma_st / (scales.sigma_l * scales.sigma_l),
        bound: (lit::<T>(2.0) * energy.mean / scales.constants.electron_rest_energy).sqrt(),
    })
}

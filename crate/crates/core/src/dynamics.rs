//! In-field evolution of the optical functions of an NSLG packet.
//!
//! The dispersion obeys the Ermakov-type equation
//!
//! ```text
//! σ'' = λ_C²/σ³ − (ω̃/2)² σ,        ω̃ = ω/c = 2λ_C/σ_L²
//! ```
//!
//! which follows from the curvature relation 1/R = σ'/σ: substituting it into
//! 1/(λ_C²R²) + (1/λ_C²)(1/R)' = 1/σ⁴ − 1/σ_L⁴ and using
//! (σ'/σ)' = σ''/σ − σ'²/σ² cancels the σ'² terms and leaves
//! σ''/(λ_C²σ) = 1/σ⁴ − 1/σ_L⁴. Its closed-form solution is evaluated by
//! [`FieldSolutionParams`]; [`integrate_optical_ode`] integrates the equation
//! directly and serves as the independent check of that solution.

use crate::constants::{Constants, FieldScales};
use crate::error::{require_finite, require_positive, Error, Result};
use crate::free_space::BeamSpec;
use crate::ode::rk4_step;
use crate::quadrature::{cumulative_simpson, uniform_spacing};
use crate::scalar::{from_usize, lit, to_f64, Real};

/// Optical functions at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticalState<T> {
    /// Dispersion σ [m].
    pub sigma: T,
    /// dσ/d(ct).
    pub sigma_rate: T,
    /// Gouy phase [rad].
    pub gouy: T,
    /// Optical path ct [m].
    pub ct: T,
}

impl<T: Real> OpticalState<T> {
    /// 1/R = σ′/σ [1/m].
    pub fn inverse_curvature(&self) -> T {
        self.sigma_rate / self.sigma
    }
}

/// The selector s(σ₀, σ₀′).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub fn value<T: Real>(self) -> T {
        match self {
            Sign::Negative => -T::one(),
            Sign::Zero => T::zero(),
            Sign::Positive => T::one(),
        }
    }

    fn of<T: Real>(x: T) -> Self {
        if x > T::zero() {
            Sign::Positive
        } else if x < T::zero() {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }
}

/// Parameters of the closed-form in-field dispersion
/// σ(t) = σ_st sqrt(1 + sqrt(1 − (σ_L/σ_st)⁴) sin[s ω̃ Δct − θ]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSolutionParams<T> {
    pub sigma_st: T,
    pub theta: T,
    pub sign: Sign,
    pub sigma_l: T,
    pub omega_per_meter: T,
}

const SNAP: f64 = 1e-12;

/// Matches the closed-form solution to the boundary values (σ₀, σ₀′).
pub fn field_solution_params<T: Real>(
    sigma0: T,
    sigma0_rate: T,
    scales: &FieldScales<T>,
) -> Result<FieldSolutionParams<T>> {
    let mut sigma0 = require_positive("boundary dispersion σ₀ [m]", sigma0)?;
    let rate = require_finite("boundary rate σ₀′", sigma0_rate)?;
    if scales.is_free() {
        return Err(Error::Precondition(
            "closed-form in-field solution needs a non-zero field".into(),
        ));
    }
    let sl = scales.sigma_l;
    let two: T = lit(2.0);
    if (sigma0 - sl).abs() <= lit::<T>(SNAP) * sl {
        sigma0 = sl;
    }
    let xi2 = rate * sl * sl / (scales.lambda_c() * sigma0);
    let s0sq = sigma0 * sigma0;
    let slsq = sl * sl;
    // σ_L² − σ₀² without cancellation
    let d = (sl - sigma0) * (sl + sigma0);
    let gap = d * d / (two * s0sq) + s0sq * xi2 * xi2 / two; // σ_st² − σ_L²
    let sigma_st_sq = slsq + gap;
    let numerator = d * (slsq + s0sq) / (two * s0sq) + s0sq * xi2 * xi2 / two; // σ_st² − σ₀²
    let denominator = (gap * (sigma_st_sq + slsq)).sqrt(); // sqrt(σ_st⁴ − σ_L⁴)

    let sign = if rate != T::zero() {
        Sign::of(rate)
    } else {
        Sign::of(d)
    };
    // sin θ and cos θ, both scaled by σ_st² A; atan2 keeps θ accurate when the
    // boundary sits close to an extremum, where an arcsine would not
    let cos_part = two * sigma0 * rate.abs() / scales.omega_per_meter;
    let theta = if denominator == T::zero() {
        T::zero()
    } else {
        let radius = numerator.hypot(cos_part);
        let consistent = (radius - denominator).abs() <= T::epsilon().sqrt() * denominator;
        if !consistent {
            return Err(Error::Inconsistent(format!(
                "phase components {} and {} do not match the amplitude {}",
                to_f64(numerator),
                to_f64(cos_part),
                to_f64(denominator)
            )));
        }
        numerator.atan2(cos_part)
    };
    Ok(FieldSolutionParams {
        sigma_st: sigma_st_sq.sqrt(),
        theta,
        sign,
        sigma_l: sl,
        omega_per_meter: scales.omega_per_meter,
    })
}

impl<T: Real> FieldSolutionParams<T> {
    fn ratio4(&self) -> T {
        let r = self.sigma_l / self.sigma_st;
        let r2 = r * r;
        r2 * r2
    }

    /// sqrt(1 − (σ_L/σ_st)⁴), the relative oscillation amplitude of σ².
    pub fn amplitude(&self) -> T {
        let r = self.sigma_l / self.sigma_st;
        let r2 = r * r;
        ((T::one() - r) * (T::one() + r) * (T::one() + r2))
            .max(T::zero())
            .sqrt()
    }

    fn phase(&self, dct: T) -> T {
        self.sign.value::<T>() * self.omega_per_meter * dct - self.theta
    }

    /// σ² as σ_st²[(1 − A) + A(1 + sin φ)] with both brackets evaluated in
    /// forms that stay accurate at the sharp minima.
    fn sigma_sq_at_phase(&self, phase: T) -> T {
        let a = self.amplitude();
        let floor = self.ratio4() / (T::one() + a);
        let s = (phase / lit(2.0) + T::FRAC_PI_4()).sin();
        self.sigma_st * self.sigma_st * (floor + lit::<T>(2.0) * a * s * s)
    }

    /// σ at `dct` past the boundary.
    pub fn sigma_at(&self, dct: T) -> T {
        self.sigma_sq_at_phase(self.phase(dct)).sqrt()
    }

    /// dσ/d(ct) at `dct` past the boundary.
    pub fn sigma_rate_at(&self, dct: T) -> T {
        let phase = self.phase(dct);
        let sigma = self.sigma_sq_at_phase(phase).sqrt();
        self.sigma_st
            * self.sigma_st
            * self.amplitude()
            * phase.cos()
            * self.sign.value::<T>()
            * self.omega_per_meter
            / (lit::<T>(2.0) * sigma)
    }

    /// Smallest dispersion reached, σ_st sqrt(1 − A).
    pub fn sigma_min(&self) -> T {
        let a = self.amplitude();
        self.sigma_st * (self.ratio4() / (T::one() + a)).sqrt()
    }

    /// Largest dispersion reached, σ_st sqrt(1 + A).
    pub fn sigma_max(&self) -> T {
        self.sigma_st * (T::one() + self.amplitude()).sqrt()
    }

    pub fn period_ct(&self) -> T {
        T::TAU() / self.omega_per_meter
    }
}

/// Exact optical-function propagation either in free space or in the field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Propagator<T> {
    /// Free spreading from (σ₀, σ₀′): σ² = σ₀² + 2σ₀σ₀′Δ + (σ₀′² + λ_C²/σ₀²)Δ².
    Free {
        sigma0: T,
        sigma0_rate: T,
        lambda_c: T,
    },
    Field(FieldSolutionParams<T>),
}

impl<T: Real> From<FieldSolutionParams<T>> for Propagator<T> {
    fn from(p: FieldSolutionParams<T>) -> Self {
        Propagator::Field(p)
    }
}

impl<T: Real> Propagator<T> {
    pub fn free(sigma0: T, sigma0_rate: T) -> Result<Self> {
        Ok(Propagator::Free {
            sigma0: require_positive("dispersion σ₀ [m]", sigma0)?,
            sigma0_rate: require_finite("rate σ₀′", sigma0_rate)?,
            lambda_c: Constants::<T>::codata().lambda_c,
        })
    }

    pub fn sigma_at(&self, dct: T) -> T {
        match *self {
            Propagator::Free {
                sigma0,
                sigma0_rate,
                lambda_c,
            } => {
                let c = sigma0_rate * sigma0_rate + lambda_c * lambda_c / (sigma0 * sigma0);
                (sigma0 * sigma0 + lit::<T>(2.0) * sigma0 * sigma0_rate * dct + c * dct * dct)
                    .sqrt()
            }
            Propagator::Field(p) => p.sigma_at(dct),
        }
    }

    pub fn sigma_rate_at(&self, dct: T) -> T {
        match *self {
            Propagator::Free {
                sigma0,
                sigma0_rate,
                lambda_c,
            } => {
                let c = sigma0_rate * sigma0_rate + lambda_c * lambda_c / (sigma0 * sigma0);
                (sigma0 * sigma0_rate + c * dct) / self.sigma_at(dct)
            }
            Propagator::Field(p) => p.sigma_rate_at(dct),
        }
    }

    pub fn omega_per_meter(&self) -> T {
        match self {
            Propagator::Free { .. } => T::zero(),
            Propagator::Field(p) => p.omega_per_meter,
        }
    }

    pub fn sigma_l(&self) -> T {
        match self {
            Propagator::Free { .. } => T::infinity(),
            Propagator::Field(p) => p.sigma_l,
        }
    }

    /// Optical state at `dct` with the supplied Gouy phase.
    pub fn state_at(&self, dct: T, gouy: T) -> OpticalState<T> {
        OpticalState {
            sigma: self.sigma_at(dct),
            sigma_rate: self.sigma_rate_at(dct),
            gouy,
            ct: dct,
        }
    }
}

impl<T: Real> Propagator<T> {
    /// Gouy phase accumulated over `dct` past the boundary, in closed form.
    ///
    /// In the field ∫dt/σ² reduces to an unwrapped arctangent of tan(φ/2)
    /// because (σ_st² − σ_st²A)(σ_st² + σ_st²A) = σ_L⁴; free spreading gives a
    /// plain arctangent.
    pub fn gouy_phase(&self, beam: &BeamSpec<T>, dct: T) -> T {
        let modes = beam.mode_factor();
        match *self {
            Propagator::Free {
                sigma0,
                sigma0_rate,
                lambda_c,
            } => {
                let c = sigma0_rate * sigma0_rate + lambda_c * lambda_c / (sigma0 * sigma0);
                let b = sigma0 * sigma0_rate;
                modes * (((c * dct + b) / lambda_c).atan() - (b / lambda_c).atan())
            }
            Propagator::Field(p) => {
                let l: T = lit(beam.l as f64);
                let landau = l * p.omega_per_meter * dct / lit(2.0);
                let breathing = match p.sign {
                    Sign::Zero => modes * p.omega_per_meter * dct / lit(2.0),
                    sign => {
                        let s = sign.value::<T>();
                        s * modes
                            * (p.unwrapped_angle(p.phase(dct))
                                - p.unwrapped_angle(p.phase(T::zero())))
                    }
                };
                landau + breathing
            }
        }
    }
}

impl<T: Real> FieldSolutionParams<T> {
    /// Antiderivative of (σ_L/σ_st)²/(2(1 + A sin φ)), continuous across the
    /// branches of tan(φ/2); it gains π per 2π of phase.
    fn unwrapped_angle(&self, phase: T) -> T {
        let r = self.sigma_l / self.sigma_st;
        let half = phase / lit(2.0);
        let turns = ((phase + T::PI()) / T::TAU()).floor();
        ((half.tan() + self.amplitude()) / (r * r)).atan() + T::PI() * turns
    }
}

/// ρ = σ·sqrt(2n+|l|+1).
pub fn rms_radius<T: Real>(sigma: T, beam: &BeamSpec<T>) -> T {
    sigma * beam.mode_factor().sqrt()
}

/// Mean-square radius from the Heisenberg equation of motion, `ct_offset`
/// past the boundary.
pub fn heisenberg_rms_sq<T: Real>(
    rho0: T,
    rho0_rate: T,
    rho_st: T,
    scales: &FieldScales<T>,
    ct_offset: T,
) -> Result<T> {
    let w = scales.omega_per_meter;
    let phase = w * ct_offset;
    let value = rho_st * rho_st
        + (rho0 * rho0 - rho_st * rho_st) * phase.cos()
        + lit::<T>(2.0) * rho0 * rho0_rate / w * phase.sin();
    if value < T::zero() || !value.is_finite() {
        return Err(Error::Inconsistent(format!(
            "mean-square radius {} is negative; ρ_st does not match the boundary state",
            to_f64(value)
        )));
    }
    Ok(value)
}

/// ρ_st = ρ_L σ_st/σ_L.
pub fn stationary_radius<T: Real>(sigma_st: T, sigma_l: T, rho_l: T) -> T {
    rho_l * sigma_st / sigma_l
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransverseEnergy<T> {
    /// ⟨E⊥⟩ [eV].
    pub mean: T,
    /// Landau energy ε⊥ [eV].
    pub landau: T,
}

impl<T: Real> TransverseEnergy<T> {
    /// ⟨E⊥⟩ − ε⊥ [eV].
    pub fn excess(&self) -> T {
        self.mean - self.landau
    }
}

pub fn mean_transverse_energy<T: Real>(
    beam: &BeamSpec<T>,
    sigma_st: T,
    scales: &FieldScales<T>,
) -> TransverseEnergy<T> {
    let half = scales.cyclotron_energy_ev() / lit(2.0);
    let ratio = sigma_st / scales.sigma_l;
    let l: T = lit(beam.l as f64);
    TransverseEnergy {
        mean: half * (beam.mode_factor() * ratio * ratio + l),
        landau: half * beam.landau_factor(),
    }
}

/// Dimensionless distances of a boundary state from the Landau fixed point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XiDiagnostics<T> {
    /// σ_L/σ₀.
    pub xi1: T,
    /// σ₀′σ_L²/(λ_C σ₀), the rate form used in the reference table.
    pub xi2_table: T,
    /// |σ₀′|σ_L/λ_C.
    pub xi2_rate: T,
}

pub fn xi_diagnostics<T: Real>(sigma0: T, sigma0_rate: T, sigma_l: T) -> XiDiagnostics<T> {
    let lambda_c = Constants::<T>::codata().lambda_c;
    XiDiagnostics {
        xi1: sigma_l / sigma0,
        xi2_table: sigma0_rate * sigma_l * sigma_l / (lambda_c * sigma0),
        xi2_rate: sigma0_rate.abs() * sigma_l / lambda_c,
    }
}

/// dΦ_G/d(ct) = λ_C[l/σ_L² + (2n+|l|+1)/σ²].
pub fn gouy_rate<T: Real>(beam: &BeamSpec<T>, sigma: T, scales: &FieldScales<T>) -> T {
    let l: T = lit(beam.l as f64);
    let landau = if scales.is_free() {
        T::zero()
    } else {
        l / (scales.sigma_l * scales.sigma_l)
    };
    scales.lambda_c() * (landau + beam.mode_factor() / (sigma * sigma))
}

/// Accumulated Gouy phase along a uniformly sampled σ trace, zero at the
/// first sample.
pub fn gouy_phase<T: Real>(
    beam: &BeamSpec<T>,
    ct: &[T],
    sigma: &[T],
    scales: &FieldScales<T>,
) -> Result<Vec<T>> {
    if ct.len() != sigma.len() {
        return Err(Error::Precondition(
            "ct and σ traces differ in length".into(),
        ));
    }
    let h = uniform_spacing(ct)?;
    if sigma.iter().any(|&s| !(s.is_finite() && s > T::zero())) {
        return Err(Error::Precondition("σ trace must be positive".into()));
    }
    let rates: Vec<T> = sigma.iter().map(|&s| gouy_rate(beam, s, scales)).collect();
    Ok(cumulative_simpson(&rates, h))
}

/// Sampled optical functions.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvolutionTrace<T> {
    pub ct: Vec<T>,
    pub sigma: Vec<T>,
    pub sigma_rate: Vec<T>,
}

impl<T: Real> EvolutionTrace<T> {
    pub fn len(&self) -> usize {
        self.ct.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ct.is_empty()
    }

    fn push(&mut self, ct: T, sigma: T, rate: T) {
        self.ct.push(ct);
        self.sigma.push(sigma);
        self.sigma_rate.push(rate);
    }
}

/// Closed-form trace on `samples` uniform intervals over `span`.
pub fn sample_closed_form<T: Real>(
    propagator: &Propagator<T>,
    span: T,
    samples: usize,
) -> EvolutionTrace<T> {
    let mut trace = EvolutionTrace::default();
    let samples = samples.max(1);
    for k in 0..=samples {
        let ct = span * from_usize::<T>(k) / from_usize::<T>(samples);
        trace.push(ct, propagator.sigma_at(ct), propagator.sigma_rate_at(ct));
    }
    trace
}

/// First integral of the dispersion equation, σ′² + λ_C²/σ² + ω̃²σ²/4.
pub fn optical_energy<T: Real>(sigma: T, sigma_rate: T, scales: &FieldScales<T>) -> T {
    let lc = scales.lambda_c();
    let w = scales.omega_per_meter;
    sigma_rate * sigma_rate + lc * lc / (sigma * sigma) + w * w * sigma * sigma / lit(4.0)
}

fn acceleration<T: Real>(sigma: T, lc: T, w: T) -> T {
    lc * lc / (sigma * sigma * sigma) - w * w * sigma / lit(4.0)
}

fn validate_ode_inputs<T: Real>(sigma0: T, sigma0_rate: T, span: T, steps: usize) -> Result<()> {
    require_positive("initial dispersion σ₀ [m]", sigma0)?;
    require_finite("initial rate σ₀′", sigma0_rate)?;
    require_positive("integration span [m]", span)?;
    if steps < 2 {
        return Err(Error::Precondition(format!(
            "need at least 2 steps, got {steps}"
        )));
    }
    Ok(())
}

const MAX_HALVINGS: usize = 10;

/// Fixed-step RK4 in `ct` with `steps` equal steps (raised if needed so that
/// ω̃h ≤ 2π/1000).
pub fn integrate_optical_ode_uniform<T: Real>(
    sigma0: T,
    sigma0_rate: T,
    scales: &FieldScales<T>,
    span: T,
    steps: usize,
) -> Result<EvolutionTrace<T>> {
    validate_ode_inputs(sigma0, sigma0_rate, span, steps)?;
    let lc = scales.lambda_c();
    let w = scales.omega_per_meter;
    let mut steps = steps;
    if !scales.is_free() {
        let needed = (to_f64(span * w) * 1000.0 / std::f64::consts::TAU).ceil() as usize;
        steps = steps.max(needed);
    }
    let f = |y: &[T; 2]| [y[1], acceleration(y[0], lc, w)];
    'retry: for _ in 0..=MAX_HALVINGS {
        let n = steps;
        let h = span / from_usize(n);
        let mut trace = EvolutionTrace::default();
        let mut y = [sigma0, sigma0_rate];
        trace.push(T::zero(), y[0], y[1]);
        for k in 1..=n {
            y = rk4_step(&f, &y, h);
            if !(y[0].is_finite() && y[0] > T::zero()) {
                steps = 2 * n;
                continue 'retry;
            }
            trace.push(h * from_usize(k), y[0], y[1]);
        }
        return Ok(trace);
    }
    Err(Error::Integration(
        "dispersion left the positive domain after 10 step halvings".into(),
    ))
}

/// Integrates the dispersion equation with classical RK4 at a fixed step in
/// the regularised parameter `s`, d(ct) = σ ds.
///
/// The regularisation spends equal effort on the wide, slow part of the
/// oscillation and on its narrow minima (the two time scales are tied by
/// σ_min σ_max = σ_L²). A first pass measures the `s`-length of `span`; the
/// second takes `steps` equal steps and lands exactly on `span`. The trace is
/// therefore non-uniform in `ct`.
pub fn integrate_optical_ode<T: Real>(
    sigma0: T,
    sigma0_rate: T,
    scales: &FieldScales<T>,
    span: T,
    steps: usize,
) -> Result<EvolutionTrace<T>> {
    validate_ode_inputs(sigma0, sigma0_rate, span, steps)?;
    let lc = scales.lambda_c();
    let w = scales.omega_per_meter;
    // y = [ct, σ, σ′], derivatives with respect to s
    let f = |y: &[T; 3]| {
        let s = y[1];
        [s, s * y[2], lc * lc / (s * s) - w * w * s * s / lit(4.0)]
    };
    let reference = if scales.is_free() {
        sigma0
    } else {
        scales.sigma_l
    };

    // pass 1: length of the span in s, and the largest σ seen
    let mut h = span / (from_usize::<T>(steps) * reference);
    let mut measured = None;
    for _ in 0..8 {
        match march(&f, [T::zero(), sigma0, sigma0_rate], h, span, steps * 64) {
            Some((taken, s_len, sigma_max)) if taken >= 1000.min(steps) => {
                measured = Some((s_len, sigma_max));
                break;
            }
            Some((taken, _, _)) => h = h * from_usize(taken.max(1)) / lit(2000.0),
            None => h = h / lit(4.0),
        }
    }
    let (s_len, sigma_max) = measured
        .ok_or_else(|| Error::Integration("could not resolve the integration span".into()))?;

    let mut steps = steps;
    if !scales.is_free() {
        let limit = T::TAU() / (lit::<T>(1000.0) * w);
        let needed = to_f64(sigma_max * s_len / limit).ceil() as usize;
        steps = steps.max(needed);
    }

    for _ in 0..=MAX_HALVINGS {
        let h = s_len / from_usize(steps);
        if let Some(trace) = regularised_pass(&f, [T::zero(), sigma0, sigma0_rate], h, span, steps)
        {
            return Ok(trace);
        }
        steps *= 2;
    }
    Err(Error::Integration(
        "dispersion left the positive domain after 10 step halvings".into(),
    ))
}

fn healthy<T: Real>(y: &[T; 3]) -> bool {
    y[1] > T::zero() && y.iter().all(|v| v.is_finite())
}

/// Steps until ct ≥ span; returns (steps taken, interpolated s-length, max σ).
fn march<T: Real, F: Fn(&[T; 3]) -> [T; 3]>(
    f: &F,
    y0: [T; 3],
    h: T,
    span: T,
    cap: usize,
) -> Option<(usize, T, T)> {
    let mut y = y0;
    let mut sigma_max = y0[1];
    for k in 0..cap {
        let next = rk4_step(f, &y, h);
        if !healthy(&next) {
            return None;
        }
        sigma_max = sigma_max.max(next[1]);
        if next[0] >= span {
            let frac = (span - y[0]) / (next[0] - y[0]);
            return Some((k + 1, h * (from_usize::<T>(k) + frac), sigma_max));
        }
        y = next;
    }
    None
}

fn regularised_pass<T: Real, F: Fn(&[T; 3]) -> [T; 3]>(
    f: &F,
    y0: [T; 3],
    h: T,
    span: T,
    steps: usize,
) -> Option<EvolutionTrace<T>> {
    let mut trace = EvolutionTrace::default();
    let mut y = y0;
    trace.push(y[0], y[1], y[2]);
    let mut taken = 0;
    loop {
        let next = rk4_step(f, &y, h);
        if !healthy(&next) {
            return None;
        }
        if next[0] >= span || taken > 2 * steps + 16 {
            break;
        }
        y = next;
        trace.push(y[0], y[1], y[2]);
        taken += 1;
    }
    // close on ct = span with Newton iterations on the partial step length
    let mut partial = (span - y[0]) / y[1];
    let mut end = y;
    for _ in 0..8 {
        end = rk4_step(f, &y, partial);
        if !healthy(&end) {
            return None;
        }
        let miss = span - end[0];
        if miss.abs() <= lit::<T>(4.0) * T::epsilon() * span {
            break;
        }
        partial = partial + miss / end[1];
    }
    trace.push(span, end[1], end[2]);
    Some(trace)
}

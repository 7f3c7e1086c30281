//! Polar-grid evaluation of the NSLG wavefunction and its diagnostics.

use num_complex::Complex;
use rustfft::FftPlanner;

use crate::constants::{Constants, FieldScales};
use crate::dynamics::{OpticalState, Propagator};
use crate::error::{require_positive, Error, Result};
use crate::free_space::BeamSpec;
use crate::quadrature::{gauss_legendre5, gregory_weights};
use crate::scalar::{from_usize, lit, to_f64, Real};

/// Generalised Laguerre polynomial L_n^α(x) by upward recurrence.
pub fn laguerre<T: Real>(n: u32, alpha: T, x: T) -> T {
    let mut prev = T::one();
    if n == 0 {
        return prev;
    }
    let mut cur = T::one() + alpha - x;
    for k in 2..=n {
        let k: T = lit(k as f64);
        let next =
            ((lit::<T>(2.0) * k - T::one() + alpha - x) * cur - (k - T::one() + alpha) * prev) / k;
        prev = cur;
        cur = next;
    }
    cur
}

/// ln √(n!/(π (n+|l|)!)).
fn log_normalisation(n: u32, abs_l: u32) -> f64 {
    let ln_ratio: f64 = -((n + 1)..=(n + abs_l))
        .map(|k| (k as f64).ln())
        .sum::<f64>();
    0.5 * (ln_ratio - std::f64::consts::PI.ln())
}

/// Uniform polar grid with Simpson weights in the measure ρ dρ dφ.
#[derive(Debug, Clone, PartialEq)]
pub struct TransverseGrid<T> {
    rho: Vec<T>,
    phi: Vec<T>,
    weights: Vec<T>,
    dr: T,
    dphi: T,
}

pub const MIN_RADIAL_NODES: usize = 256;

impl<T: Real> TransverseGrid<T> {
    pub fn new(rho_max: T, n_r: usize, n_phi: usize) -> Result<Self> {
        let rho_max = require_positive("grid extent ρ_max [m]", rho_max)?;
        if n_r < MIN_RADIAL_NODES {
            return Err(Error::Precondition(format!(
                "need at least {MIN_RADIAL_NODES} radial nodes, got {n_r}"
            )));
        }
        if n_phi < 4 {
            return Err(Error::Precondition(format!(
                "need at least 4 azimuthal nodes, got {n_phi}"
            )));
        }
        let dr = rho_max / from_usize(n_r - 1);
        let dphi = T::TAU() / from_usize(n_phi);
        let rho: Vec<T> = (0..n_r).map(|i| dr * from_usize(i)).collect();
        let phi = (0..n_phi).map(|j| dphi * from_usize(j)).collect();
        let weights = gregory_weights(n_r, dr)?
            .into_iter()
            .zip(&rho)
            .map(|(w, &r)| w * r * dphi)
            .collect();
        Ok(Self {
            rho,
            phi,
            weights,
            dr,
            dphi,
        })
    }

    /// Smallest ρ_max that keeps the truncated norm negligible for σ.
    pub fn required_extent(sigma: T, beam: &BeamSpec<T>) -> T {
        let spread = lit::<T>(2.0) * beam.mode_factor().sqrt() + lit(6.0);
        sigma * spread.max(lit(8.0))
    }

    /// Grid reaching exactly the required extent for the widest of `sigmas`.
    pub fn covering(sigmas: &[T], beam: &BeamSpec<T>, n_r: usize, n_phi: usize) -> Result<Self> {
        let widest = sigmas.iter().cloned().fold(T::zero(), T::max);
        Self::new(Self::required_extent(widest, beam), n_r, n_phi)
    }

    pub fn rho(&self) -> &[T] {
        &self.rho
    }

    pub fn phi(&self) -> &[T] {
        &self.phi
    }

    pub fn n_r(&self) -> usize {
        self.rho.len()
    }

    pub fn n_phi(&self) -> usize {
        self.phi.len()
    }

    pub fn rho_max(&self) -> T {
        self.rho[self.rho.len() - 1]
    }

    pub fn dr(&self) -> T {
        self.dr
    }

    /// Quadrature weight of every node on ring `i`.
    pub fn ring_weight(&self, i: usize) -> T {
        self.weights[i]
    }

    fn check_covers(&self, sigma: T, beam: &BeamSpec<T>) -> Result<()> {
        let need = Self::required_extent(sigma, beam);
        if self.rho_max() < need * (T::one() - lit(1e-12)) {
            return Err(Error::Precondition(format!(
                "grid extent {} m is below the coverage bound {} m for σ = {} m",
                to_f64(self.rho_max()),
                to_f64(need),
                to_f64(sigma)
            )));
        }
        if self.n_phi() <= 2 * beam.abs_l() as usize {
            return Err(Error::Precondition(format!(
                "{} azimuthal nodes cannot resolve l = {}",
                self.n_phi(),
                beam.l
            )));
        }
        Ok(())
    }
}

/// Wavefunction samples, ring-major: index `i * n_phi + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiSample<T> {
    pub grid: TransverseGrid<T>,
    pub values: Vec<Complex<T>>,
    pub n: u32,
    pub l: i32,
    pub sigma: T,
    pub sigma_rate: T,
    pub gouy: T,
}

impl<T: Real> PsiSample<T> {
    fn weighted_sum<F: Fn(usize, Complex<T>) -> T>(&self, f: F) -> T {
        let n_phi = self.grid.n_phi();
        let mut total = T::zero();
        for (i, ring) in self.values.chunks(n_phi).enumerate() {
            let ring_sum = ring.iter().fold(T::zero(), |acc, &v| acc + f(i, v));
            total = total + self.grid.ring_weight(i) * ring_sum;
        }
        total
    }

    pub fn norm_sq(&self) -> T {
        self.weighted_sum(|_, v| v.norm_sqr())
    }

    /// ⟨ρ²⟩ of the normalised density.
    pub fn expectation_rho_sq(&self) -> T {
        let rho = self.grid.rho();
        self.weighted_sum(|i, v| v.norm_sqr() * rho[i] * rho[i]) / self.norm_sq()
    }

    /// ⟨L_z⟩/ħ from the azimuthal Fourier spectrum of every ring.
    pub fn expectation_lz(&self) -> T {
        let n_phi = self.grid.n_phi();
        let fft = FftPlanner::new().plan_fft_forward(n_phi);
        let mut total = T::zero();
        let mut buf = vec![Complex::new(T::zero(), T::zero()); n_phi];
        for (i, ring) in self.values.chunks(n_phi).enumerate() {
            buf.copy_from_slice(ring);
            fft.process(&mut buf);
            let moment = buf.iter().enumerate().fold(T::zero(), |acc, (k, c)| {
                acc + mode_number::<T>(k, n_phi) * c.norm_sqr()
            });
            total = total + self.grid.ring_weight(i) * moment / from_usize(n_phi);
        }
        total / self.norm_sq()
    }

    /// ⟨self|other⟩ under grid quadrature.
    pub fn inner(&self, other: &PsiSample<T>) -> Result<Complex<T>> {
        if self.grid != other.grid {
            return Err(Error::Precondition(
                "samples live on different grids".into(),
            ));
        }
        let n_phi = self.grid.n_phi();
        let mut total = Complex::new(T::zero(), T::zero());
        for (i, (a, b)) in self
            .values
            .chunks(n_phi)
            .zip(other.values.chunks(n_phi))
            .enumerate()
        {
            let ring = a
                .iter()
                .zip(b)
                .fold(Complex::new(T::zero(), T::zero()), |acc, (x, y)| {
                    acc + x.conj() * y
                });
            total = total + ring * self.grid.ring_weight(i);
        }
        Ok(total)
    }

    /// |Ψ|² on the grid, ring-major.
    pub fn density(&self) -> Vec<T> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }
}

/// Signed Fourier mode of FFT bin `k`; the Nyquist bin counts as zero.
fn mode_number<T: Real>(k: usize, n: usize) -> T {
    if 2 * k < n {
        from_usize(k)
    } else if 2 * k == n {
        T::zero()
    } else {
        -from_usize::<T>(n - k)
    }
}

/// Fills `out` with Ψ, leaving out a chirp e^{iκ_ref ρ²}.
fn fill<T: Real>(
    grid: &TransverseGrid<T>,
    beam: &BeamSpec<T>,
    sigma: T,
    sigma_rate: T,
    gouy: T,
    kappa_ref: T,
    out: &mut Vec<Complex<T>>,
) {
    let lambda_c = Constants::<T>::codata().lambda_c;
    let abs_l = beam.abs_l();
    let alpha: T = lit(abs_l as f64);
    let ln_norm: T = lit(log_normalisation(beam.n, abs_l));
    let l: T = lit(beam.l as f64);
    let kappa = sigma_rate / (lit::<T>(2.0) * lambda_c * sigma) - kappa_ref;
    out.clear();
    for &r in grid.rho() {
        let x = r / sigma;
        let power = if abs_l == 0 {
            T::zero()
        } else if r == T::zero() {
            T::neg_infinity()
        } else {
            alpha * x.ln()
        };
        let amplitude =
            (ln_norm + power - x * x / lit(2.0)).exp() * laguerre(beam.n, alpha, x * x) / sigma;
        let radial_phase = kappa * r * r - gouy;
        for &p in grid.phi() {
            out.push(Complex::from_polar(amplitude, l * p + radial_phase));
        }
    }
}

/// Samples Ψ_{n,l} for the optical state on `grid`.
pub fn psi_transverse<T: Real>(
    grid: &TransverseGrid<T>,
    state: &OpticalState<T>,
    beam: &BeamSpec<T>,
) -> Result<PsiSample<T>> {
    require_positive("dispersion σ [m]", state.sigma)?;
    grid.check_covers(state.sigma, beam)?;
    let mut values = Vec::with_capacity(grid.n_r() * grid.n_phi());
    fill(
        grid,
        beam,
        state.sigma,
        state.sigma_rate,
        state.gouy,
        T::zero(),
        &mut values,
    );
    Ok(PsiSample {
        grid: grid.clone(),
        values,
        n: beam.n,
        l: beam.l,
        sigma: state.sigma,
        sigma_rate: state.sigma_rate,
        gouy: state.gouy,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualOptions<T> {
    /// Multiplies the Gouy rate; 1 for the physical state.
    pub gouy_slope_scale: T,
    /// Time step in ct; `None` picks 10⁻⁶ of the natural time scale.
    pub time_step: Option<T>,
    /// Largest tolerated Richardson estimate of the discretisation error,
    /// relative to ‖ĤΨ‖.
    pub max_discretisation_error: T,
}

impl<T: Real> Default for ResidualOptions<T> {
    fn default() -> Self {
        Self {
            gouy_slope_scale: T::one(),
            time_step: None,
            max_discretisation_error: lit(1e-4),
        }
    }
}

/// Relative residual ‖i∂Ψ/∂(ct) − ĤΨ‖/‖ĤΨ‖ of the transverse Schrödinger
/// equation with Ĥ = −(λ_C/2)Δ + (ω̃/2)L̂_z + (ω̃²/8λ_C)ρ² at `ct`.
///
/// The curvature chirp e^{iκρ²} at `ct` is factored out analytically so the
/// finite differences act only on the slowly varying envelope. Radial
/// derivatives are 5-point central differences, azimuthal ones spectral, and
/// the time derivative a 4th-order symmetric stencil.
pub fn schrodinger_residual<T: Real>(
    beam: &BeamSpec<T>,
    scales: &FieldScales<T>,
    propagator: &Propagator<T>,
    ct: T,
    grid: &TransverseGrid<T>,
    options: &ResidualOptions<T>,
) -> Result<T> {
    let lc = scales.lambda_c();
    let w = propagator.omega_per_meter();
    if (w - scales.omega_per_meter).abs() > lit::<T>(1e-12) * w.abs() {
        return Err(Error::Precondition(
            "propagator and field scales disagree on the cyclotron frequency".into(),
        ));
    }
    let sigma = propagator.sigma_at(ct);
    let sigma_rate = propagator.sigma_rate_at(ct);
    require_positive("dispersion σ [m]", sigma)?;
    grid.check_covers(sigma, beam)?;
    let two: T = lit(2.0);
    let kappa = sigma_rate / (two * lc * sigma);
    let h = match options.time_step {
        Some(h) => require_positive("time step [m]", h)?,
        None if scales.is_free() => lit::<T>(1e-6) * sigma * sigma / lc,
        None => lit::<T>(1e-6) * scales.cyclotron_period_ct(),
    };
    let l: T = lit(beam.l as f64);
    let landau_rate = if scales.is_free() {
        T::zero()
    } else {
        l / (scales.sigma_l * scales.sigma_l)
    };
    let gouy_rate = |t: T| {
        let s = propagator.sigma_at(t);
        options.gouy_slope_scale * lc * (landau_rate + beam.mode_factor() / (s * s))
    };

    let (n_r, n_phi) = (grid.n_r(), grid.n_phi());
    let envelope = |k: i32| {
        let t = ct + h * lit(k as f64);
        let gouy = if k == 0 {
            T::zero()
        } else {
            gauss_legendre5(gouy_rate, ct, t)
        };
        let mut out = Vec::with_capacity(n_r * n_phi);
        fill(
            grid,
            beam,
            propagator.sigma_at(t),
            propagator.sigma_rate_at(t),
            gouy,
            kappa,
            &mut out,
        );
        out
    };
    let g0 = envelope(0);
    let (gm2, gm1, gp1, gp2) = (envelope(-2), envelope(-1), envelope(1), envelope(2));

    let i_unit = Complex::new(T::zero(), T::one());
    let twelve_h: T = lit::<T>(12.0) * h;
    let dt4: Vec<Complex<T>> = (0..g0.len())
        .map(|k| (gm2[k] - gp2[k] + (gp1[k] - gm1[k]) * lit::<T>(8.0)) / twelve_h)
        .collect();
    let dt2_diff = norm_ratio(
        (0..g0.len()).map(|k| (gp1[k] - gm1[k]) / (two * h) - dt4[k]),
        dt4.iter().cloned(),
    );
    if dt2_diff > options.max_discretisation_error.sqrt() {
        return Err(Error::Diagnostics(format!(
            "time step {} m too coarse: low/high order derivatives differ by {:e}",
            to_f64(h),
            to_f64(dt2_diff)
        )));
    }

    let (dphi1, dphi2) = azimuthal_derivatives(&g0, n_phi);
    let rho = grid.rho();
    let dr = grid.dr();
    let apply = |i: usize, j: usize, step: usize| -> Complex<T> {
        let at = |m: isize| g0[((i as isize + m * step as isize) as usize) * n_phi + j];
        let hh = dr * from_usize(step);
        let d1 = (at(-2) - at(2) + (at(1) - at(-1)) * lit::<T>(8.0)) / (lit::<T>(12.0) * hh);
        let d2 = ((at(-1) + at(1)) * lit::<T>(16.0) - at(-2) - at(2) - at(0) * lit::<T>(30.0))
            / (lit::<T>(12.0) * hh * hh);
        let r = rho[i];
        let g = at(0);
        let k = i * n_phi + j;
        let laplacian = d2 + d1 / r + dphi2[k] / (r * r);
        let chirped = laplacian
            + i_unit * (d1 * (lit::<T>(4.0) * kappa * r) + g * (lit::<T>(4.0) * kappa))
            - g * (lit::<T>(4.0) * kappa * kappa * r * r);
        chirped * (-lc / two)
            + (-i_unit * dphi1[k]) * (w / two)
            + g * (w * w / (lit::<T>(8.0) * lc) * r * r)
    };

    let mut resid = T::zero();
    let mut ham = T::zero();
    let mut rich_diff = T::zero();
    let mut rich_ref = T::zero();
    for i in 2..n_r - 2 {
        let wgt = rho[i];
        for j in 0..n_phi {
            let hg = apply(i, j, 1);
            let r = i_unit * dt4[i * n_phi + j] - hg;
            resid = resid + wgt * r.norm_sqr();
            ham = ham + wgt * hg.norm_sqr();
            if i >= 4 && i + 4 < n_r {
                rich_diff = rich_diff + wgt * (hg - apply(i, j, 2)).norm_sqr();
                rich_ref = rich_ref + wgt * hg.norm_sqr();
            }
        }
    }
    if !(ham.is_finite() && ham > T::zero()) {
        return Err(Error::Diagnostics("ĤΨ vanishes on the grid".into()));
    }
    let spatial = (rich_diff / rich_ref).sqrt() / lit(15.0);
    let resolved = spatial <= options.max_discretisation_error;
    if !resolved {
        return Err(Error::Diagnostics(format!(
            "radial grid too coarse: Richardson error estimate {:e}",
            to_f64(spatial)
        )));
    }
    Ok((resid / ham).sqrt())
}

fn norm_ratio<T: Real>(
    num: impl Iterator<Item = Complex<T>>,
    den: impl Iterator<Item = Complex<T>>,
) -> T {
    let a = num.fold(T::zero(), |acc, v| acc + v.norm_sqr());
    let b = den.fold(T::zero(), |acc, v| acc + v.norm_sqr());
    (a / b).sqrt()
}

/// First and second φ-derivatives of ring-major samples.
fn azimuthal_derivatives<T: Real>(
    values: &[Complex<T>],
    n_phi: usize,
) -> (Vec<Complex<T>>, Vec<Complex<T>>) {
    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft_forward(n_phi);
    let inverse = planner.plan_fft_inverse(n_phi);
    let scale = T::one() / from_usize(n_phi);
    let mut first = Vec::with_capacity(values.len());
    let mut second = Vec::with_capacity(values.len());
    let mut spec = vec![Complex::new(T::zero(), T::zero()); n_phi];
    let mut a = spec.clone();
    let mut b = spec.clone();
    for ring in values.chunks(n_phi) {
        spec.copy_from_slice(ring);
        forward.process(&mut spec);
        for k in 0..n_phi {
            let m = mode_number::<T>(k, n_phi);
            a[k] = spec[k] * Complex::new(T::zero(), m * scale);
            b[k] = spec[k] * (-m * m * scale);
        }
        inverse.process(&mut a);
        inverse.process(&mut b);
        first.extend_from_slice(&a);
        second.extend_from_slice(&b);
    }
    (first, second)
}

/// Spreading Gaussian longitudinal packet moving at βc.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LongitudinalPacket<T> {
    pub sigma_z: T,
    pub beta: T,
    /// Centre at `ct0` [m].
    pub z0: T,
    pub ct0: T,
}

impl<T: Real> LongitudinalPacket<T> {
    pub fn new(sigma_z: T, beta: T, z0: T, ct0: T) -> Result<Self> {
        Ok(Self {
            sigma_z: require_positive("packet length σ_z [m]", sigma_z)?,
            beta,
            z0,
            ct0,
        })
    }

    /// Width sqrt(σ_z² + (λ_C ct̃/σ_z)²) at optical path `ct`.
    pub fn width(&self, ct: T) -> T {
        let lc = Constants::<T>::codata().lambda_c;
        let spread = lc * (ct - self.ct0) / self.sigma_z;
        self.sigma_z.hypot(spread)
    }

    pub fn centre(&self, ct: T) -> T {
        self.z0 + self.beta * (ct - self.ct0)
    }

    /// Normalised probability density [1/m].
    pub fn density(&self, z: T, ct: T) -> T {
        let w = self.width(ct);
        let u = (z - self.centre(ct)) / w;
        (-u * u).exp() / (T::PI().sqrt() * w)
    }
}

/// L² distance between the wavefunctions of two optical states after
/// removing the best global phase.
pub fn continuity_mismatch<T: Real>(
    free_state: &OpticalState<T>,
    field_state: &OpticalState<T>,
    beam: &BeamSpec<T>,
    grid: &TransverseGrid<T>,
) -> Result<T> {
    let a = psi_transverse(grid, free_state, beam)?;
    let b = psi_transverse(grid, field_state, beam)?;
    let overlap = b.inner(&a)?;
    let align = if overlap.norm() > T::zero() {
        Complex::from_polar(T::one(), overlap.arg())
    } else {
        Complex::new(T::one(), T::zero())
    };
    let n_phi = grid.n_phi();
    let mut total = T::zero();
    for (i, (x, y)) in a
        .values
        .chunks(n_phi)
        .zip(b.values.chunks(n_phi))
        .enumerate()
    {
        let ring = x
            .iter()
            .zip(y)
            .fold(T::zero(), |acc, (&u, &v)| acc + (u - align * v).norm_sqr());
        total = total + grid.ring_weight(i) * ring;
    }
    Ok(total.sqrt())
}

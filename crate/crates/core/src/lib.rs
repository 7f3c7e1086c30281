//! Dispersion dynamics of vortex (Laguerre-Gaussian) electron packets that
//! cross from free space into a uniform solenoid field.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the
//! `…F64`/`…F32` aliases below name the common instantiations. Scenarios and
//! file output are `f64` only.

pub mod constants;
pub mod dynamics;
pub mod error;
pub mod free_space;
pub mod ode;
pub mod quadrature;
pub mod scalar;
pub mod scenario;
pub mod validity;
pub mod wavefunction;

pub use constants::{
    beta_from_kinetic_energy, diffraction_scales, field_scales, Constants, DiffractionScales,
    FieldScales, Kinematics,
};
pub use dynamics::{
    field_solution_params, gouy_phase, gouy_rate, heisenberg_rms_sq, integrate_optical_ode,
    integrate_optical_ode_uniform, mean_transverse_energy, optical_energy, rms_radius,
    sample_closed_form, stationary_radius, xi_diagnostics, EvolutionTrace, FieldSolutionParams,
    OpticalState, Propagator, Sign, TransverseEnergy, XiDiagnostics,
};
pub use error::{Error, Result};
pub use free_space::{
    boundary_state, boundary_state_with_rayleigh, free_divergence, free_rms_radius, BeamSpec,
    BoundaryState, Geometry,
};
pub use scalar::Real;
pub use scenario::{
    emit, preset, run_scenario, table1, OutputFormat, ScenarioConfig, ScenarioReport, Table1,
    TraceRow,
};
pub use validity::{
    effective_length, fringe_energy_change, space_regime, transfer_time_check, vphi_estimate,
    EffectiveLength, FringeEnergy, FringeProfile, SpaceRegime, TransferCheck, Verdict,
    VphiEstimate,
};
pub use wavefunction::{
    continuity_mismatch, laguerre, psi_transverse, schrodinger_residual, LongitudinalPacket,
    PsiSample, ResidualOptions, TransverseGrid,
};

pub type BeamSpecF64 = BeamSpec<f64>;
pub type BeamSpecF32 = BeamSpec<f32>;
pub type FieldScalesF64 = FieldScales<f64>;
pub type FieldScalesF32 = FieldScales<f32>;
pub type OpticalStateF64 = OpticalState<f64>;
pub type OpticalStateF32 = OpticalState<f32>;
pub type FieldSolutionF64 = FieldSolutionParams<f64>;
pub type FieldSolutionF32 = FieldSolutionParams<f32>;
pub type PropagatorF64 = Propagator<f64>;
pub type PropagatorF32 = Propagator<f32>;
pub type EvolutionTraceF64 = EvolutionTrace<f64>;
pub type EvolutionTraceF32 = EvolutionTrace<f32>;
pub type TransverseGridF64 = TransverseGrid<f64>;
pub type TransverseGridF32 = TransverseGrid<f32>;
pub type PsiSampleF64 = PsiSample<f64>;
pub type PsiSampleF32 = PsiSample<f32>;
pub type FringeProfileF64 = FringeProfile<f64>;

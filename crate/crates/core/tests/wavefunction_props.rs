use nslg_core::OpticalStateF32;
use nslg_core::{
    field_scales, field_solution_params, psi_transverse, schrodinger_residual, BeamSpec,
    LongitudinalPacket, Propagator, PsiSampleF32, TransverseGrid, TransverseGridF32,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

#[test]
fn moments_follow_sigma_at_random_times() {
    let s = field_scales(0.5).unwrap();
    let mut rng = StdRng::seed_from_u64(7);
    for _ in 0..6 {
        let n = rng.gen_range(0..3u32);
        let l = rng.gen_range(-4..=4);
        let beam = BeamSpec::<f64>::new(n, l, 1e-6).unwrap();
        let sigma0 = s.sigma_l * rng.gen_range(0.5..4.0);
        let rate = rng.gen_range(-1e-4..1e-4);
        let prop = Propagator::Field(field_solution_params(sigma0, rate, &s).unwrap());
        let ct = rng.gen_range(0.0..2.0) * s.cyclotron_period_ct();
        let state = prop.state_at(ct, prop.gouy_phase(&beam, ct));
        let grid = TransverseGrid::covering(&[state.sigma], &beam, 384, 32).unwrap();
        let psi = psi_transverse(&grid, &state, &beam).unwrap();
        assert!(
            (psi.norm_sq() - 1.0).abs() < 1e-8,
            "n={n} l={l} norm={:e}",
            psi.norm_sq() - 1.0
        );
        let want = beam.mode_factor() * state.sigma * state.sigma;
        assert!(rel(psi.expectation_rho_sq(), want) < 1e-7);
        assert!((psi.expectation_lz() - l as f64).abs() < 1e-8);
    }
}

#[test]
fn residual_stays_small_off_the_landau_point() {
    let s = field_scales(1.0).unwrap();
    let beam = BeamSpec::<f64>::new(1, -2, 1e-6).unwrap();
    let prop = Propagator::Field(field_solution_params(2.5 * s.sigma_l, 3e-5, &s).unwrap());
    let ct = 0.61 * s.cyclotron_period_ct();
    let sigmas = [prop.sigma_at(ct)];
    let grid = TransverseGrid::covering(&sigmas, &beam, 512, 32).unwrap();
    let r = schrodinger_residual(&beam, &s, &prop, ct, &grid, &Default::default()).unwrap();
    assert!(r < 1e-5, "{r}");
}

#[test]
fn grid_must_cover_the_packet() {
    let beam = BeamSpec::<f64>::new(0, 3, 1e-6).unwrap();
    let s = field_scales(1.0).unwrap();
    let prop = Propagator::Field(field_solution_params(s.sigma_l, 0.0, &s).unwrap());
    let state = prop.state_at(0.0, 0.0);
    let grid = TransverseGrid::new(2.0 * s.sigma_l, 256, 16).unwrap();
    assert!(psi_transverse(&grid, &state, &beam).is_err());
    assert!(TransverseGrid::<f64>::new(1e-6, 64, 16).is_err());
}

#[test]
fn longitudinal_packet_is_normalised_and_moves_at_beta() {
    let packet = LongitudinalPacket::new(1e-9, 0.06, 0.0, 0.0).unwrap();
    let ct = 1e-3;
    let centre = packet.centre(ct);
    assert!(rel(centre, 0.06 * ct) < 1e-12);
    let w = packet.width(ct);
    let h = w / 50.0;
    let total: f64 = (-500..=500)
        .map(|k| packet.density(centre + k as f64 * h, ct) * h)
        .sum();
    assert!((total - 1.0).abs() < 1e-9);
}

#[test]
fn single_precision_wavefunction_is_normalised() {
    let s = field_scales(1.0f32).unwrap();
    let beam = BeamSpec::<f32>::new(0, 2, 1e-6).unwrap();
    let state = OpticalStateF32 {
        sigma: 2.0 * s.sigma_l,
        sigma_rate: 0.0,
        gouy: 0.0,
        ct: 0.0,
    };
    let grid: TransverseGridF32 = TransverseGrid::covering(&[state.sigma], &beam, 256, 16).unwrap();
    let psi: PsiSampleF32 = psi_transverse(&grid, &state, &beam).unwrap();
    assert!((psi.norm_sq() - 1.0).abs() < 1e-4);
}

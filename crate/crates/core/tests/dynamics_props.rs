use nslg_core::{
    field_scales, field_solution_params, heisenberg_rms_sq, integrate_optical_ode, BeamSpec,
    FieldScales, FieldScalesF32, FieldSolutionF32, Propagator,
};
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn state(log_h: f64, log_ratio: f64, log_xi: f64, negative: bool) -> (FieldScales<f64>, f64, f64) {
    let s = field_scales(10f64.powf(log_h)).unwrap();
    let sigma0 = s.sigma_l * 10f64.powf(log_ratio);
    let sign = if negative { -1.0 } else { 1.0 };
    let rate = sign * 10f64.powf(log_xi) * s.lambda_c() / s.sigma_l;
    (s, sigma0, rate)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn closed_form_tracks_rk4(
        log_h in -2.0..0.3f64,
        log_ratio in -1.0..2.0f64,
        log_xi in -3.0..2.0f64,
        negative: bool,
    ) {
        let (s, sigma0, rate) = state(log_h, log_ratio, log_xi, negative);
        let p = field_solution_params(sigma0, rate, &s).unwrap();
        let trace = integrate_optical_ode(sigma0, rate, &s, p.period_ct(), 20_000).unwrap();
        for (&ct, &v) in trace.ct.iter().zip(&trace.sigma).step_by(37) {
            prop_assert!(rel(v, p.sigma_at(ct)) < 1e-8);
        }
    }

    #[test]
    fn starts_at_boundary_state(
        log_h in -2.0..0.3f64,
        log_ratio in -1.0..2.0f64,
        log_xi in -3.0..2.0f64,
        negative: bool,
    ) {
        let (s, sigma0, rate) = state(log_h, log_ratio, log_xi, negative);
        let p = field_solution_params(sigma0, rate, &s).unwrap();
        prop_assert!(rel(p.sigma_at(0.0), sigma0) < 1e-12);
        prop_assert!(rel(p.sigma_rate_at(0.0), rate) < 1e-7);
        prop_assert!(rel(p.sigma_min() * p.sigma_max(), s.sigma_l * s.sigma_l) < 1e-12);
    }

    #[test]
    fn heisenberg_matches_closed_form(
        log_h in -2.0..0.3f64,
        log_ratio in -1.0..1.5f64,
        log_xi in -3.0..1.0f64,
        negative: bool,
        n in 0u32..4,
        l in -5i32..=5,
        frac in 0.0..3.0f64,
    ) {
        let (s, sigma0, rate) = state(log_h, log_ratio, log_xi, negative);
        let beam = BeamSpec::<f64>::new(n, l, 1e-6).unwrap();
        let root = beam.mode_factor().sqrt();
        let p = field_solution_params(sigma0, rate, &s).unwrap();
        let ct = frac * p.period_ct();
        let got = heisenberg_rms_sq(sigma0 * root, rate * root, p.sigma_st * root, &s, ct).unwrap();
        let sigma = p.sigma_at(ct);
        prop_assert!(rel(got, beam.mode_factor() * sigma * sigma) < 1e-9);
    }

    #[test]
    fn period_is_cyclotron_period(log_h in -2.0..0.3f64, log_ratio in -1.0..2.0f64) {
        let (s, sigma0, _) = state(log_h, log_ratio, 0.0, false);
        let p = field_solution_params(sigma0, 0.0, &s).unwrap();
        let t = p.period_ct();
        prop_assert!(rel(p.sigma_at(1.3 * t), p.sigma_at(0.3 * t)) < 1e-9);
        prop_assert!(rel(t, s.cyclotron_period_ct()) < 1e-12);
    }
}

#[test]
fn single_precision_aliases_agree_with_double() {
    let s32: FieldScalesF32 = field_scales(1.0f32).unwrap();
    let s64 = field_scales(1.0f64).unwrap();
    let p32: FieldSolutionF32 = field_solution_params(3.0 * s32.sigma_l, -1e-4, &s32).unwrap();
    let p64 = field_solution_params(3.0 * s64.sigma_l, -1e-4, &s64).unwrap();
    for k in 0..16 {
        let ct = k as f64 * 0.0625 * p64.period_ct();
        let a = p32.sigma_at(ct as f32) as f64;
        assert!(rel(a, p64.sigma_at(ct)) < 1e-3, "k = {k}");
    }
}

#[test]
fn free_propagator_reaches_its_waist() {
    let waist = 1e-6;
    let ct_to_waist = 0.3;
    let lambda = field_scales(1.0f64).unwrap().lambda_c();
    // σ(ct)² = σ_w² + (λ ct / σ_w)², evaluated back from the waist
    let b = lambda * ct_to_waist / waist;
    let sigma0 = (waist * waist + b * b).sqrt();
    let rate = -b * (lambda / waist) / sigma0;
    let prop = Propagator::free(sigma0, rate).unwrap();
    assert!(rel(prop.sigma_at(ct_to_waist), waist) < 1e-12);
    assert!(prop.sigma_rate_at(ct_to_waist).abs() < 1e-12);
}

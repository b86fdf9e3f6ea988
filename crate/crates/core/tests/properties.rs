mod common;

use std::f64::consts::PI;

use common::*;
use mixphase::interferogram::{hermitian_eigen, peak_shift, synthesize_pattern};
use mixphase::phase::{
    interference_functional, linear_weight_family, pancharatnam_phase, spin_half_density, spin_half_functional,
    spin_half_unitary, spin_system_functional, wrap_phase, zeeman_unitary, Spin, SpinHalfPoint, DEFAULT_EPSILON,
};
use mixphase::qmatrix::{pure_state_density, validate_density, validate_unitary, ComplexMatrix};
use mixphase::topology::{circle_path, sweep_path, track_phase, winding_number, Family, Orientation};
use mixphase::Complex64;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn trace_is_cyclic(seed in any::<u64>(), n in 1usize..6) {
        let mut g = rng(seed);
        let (a, b) = (random_matrix(&mut g, n), random_matrix(&mut g, n));
        let ab = a.mat_mul(&b).unwrap().trace();
        let ba = b.mat_mul(&a).unwrap().trace();
        prop_assert!((ab - ba).norm() < 1e-12);
    }

    #[test]
    fn product_is_associative(seed in any::<u64>(), n in 1usize..6) {
        let mut g = rng(seed);
        let (a, b, c) = (random_matrix(&mut g, n), random_matrix(&mut g, n), random_matrix(&mut g, n));
        let left = a.mat_mul(&b).unwrap().mat_mul(&c).unwrap();
        let right = a.mat_mul(&b.mat_mul(&c).unwrap()).unwrap();
        prop_assert!(left.max_abs_diff(&right).unwrap() < 1e-11);
    }

    #[test]
    fn projectors_are_valid_densities(seed in any::<u64>(), n in 1usize..8) {
        let psi = random_vector(&mut rng(seed), n);
        let rho = pure_state_density(&psi).unwrap();
        prop_assert!(validate_density(rho.matrix().clone(), 1e-10).is_ok());
    }

    #[test]
    fn matrix_route_matches_closed_form(r in -1.0f64..=1.0, delta in -20.0f64..20.0) {
        let matrix = interference_functional(&spin_half_unitary(delta).unwrap(), &spin_half_density(r).unwrap(), DEFAULT_EPSILON).unwrap();
        let closed = spin_half_functional(SpinHalfPoint::new(r, delta).unwrap(), DEFAULT_EPSILON);
        prop_assert!((matrix.z - closed.z).norm() < 1e-12);
        prop_assert!((closed.z - spin_half_closed_form(r, delta)).norm() < 1e-15);
    }

    #[test]
    fn pure_state_routes_agree(seed in any::<u64>(), n in 1usize..6) {
        let mut g = rng(seed);
        let psi = random_vector(&mut g, n);
        let u = random_unitary(&mut g, n);
        let direct = pancharatnam_phase(&psi, &u, DEFAULT_EPSILON).unwrap();
        let mixed = interference_functional(&u, &pure_state_density(&psi).unwrap(), DEFAULT_EPSILON).unwrap();
        prop_assert!((direct.z - mixed.z).norm() < 1e-12);
    }

    #[test]
    fn phase_split_is_consistent(seed in any::<u64>(), n in 1usize..6) {
        let mut g = rng(seed);
        let v = interference_functional(&random_unitary(&mut g, n), &random_density(&mut g, n), DEFAULT_EPSILON).unwrap();
        prop_assert!((v.visibility - v.z.norm()).abs() <= 1e-15);
        prop_assert_eq!(v.is_indeterminate(), v.visibility <= v.epsilon);
        prop_assert!(v.visibility <= 1.0 + 1e-12);
        if let Some(phi) = v.phase {
            prop_assert!(phi > -PI && phi <= PI);
            prop_assert!((v.z - Complex64::from_polar(v.visibility, phi)).norm() < 1e-12);
        }
    }

    #[test]
    fn spin_system_matches_matrix_route(two_j in 1u32..7, r in -1.0f64..=1.0, delta in -10.0f64..10.0) {
        let spin = Spin::from_twice(two_j).unwrap();
        let system = linear_weight_family(spin, r).unwrap();
        let direct = spin_system_functional(&system, delta, DEFAULT_EPSILON).z;
        let matrix = interference_functional(&zeeman_unitary(spin, delta).unwrap(), &system.density().unwrap(), DEFAULT_EPSILON).unwrap().z;
        prop_assert!((direct - matrix).norm() < 1e-12);
    }

    #[test]
    fn spin_half_linear_family_is_spin_half_density(r in -1.0f64..=1.0) {
        let w = linear_weight_family(Spin::HALF, r).unwrap();
        let rho = spin_half_density(r).unwrap();
        prop_assert!((w.weights()[0] - rho.matrix().get(0, 0).re).abs() < 1e-15);
        prop_assert!((w.weights()[1] - rho.matrix().get(1, 1).re).abs() < 1e-15);
    }

    #[test]
    fn sign_of_slope_follows_r(r in prop_oneof![-1.0f64..-1e-3, 1e-3f64..1.0]) {
        let trace = track_phase(&sweep_path(r, 0.0, PI, 97).unwrap(), DEFAULT_EPSILON, 40).unwrap();
        for w in trace.samples.windows(2) {
            prop_assert!((w[1].accumulated_phase - w[0].accumulated_phase) * r.signum() > 0.0);
        }
        prop_assert!((trace.total_phase - r.signum() * PI).abs() < 1e-9);
    }

    #[test]
    fn refinement_keeps_consecutive_samples_close(r in -1.0f64..=1.0, samples in 2usize..40) {
        prop_assume!(r != 0.0);
        let trace = track_phase(&sweep_path(r, 0.0, 2.0 * PI, samples).unwrap(), DEFAULT_EPSILON, 40).unwrap();
        prop_assert_eq!(trace.samples[0].accumulated_phase, 0.0);
        for w in trace.samples.windows(2) {
            prop_assert!((w[1].accumulated_phase - w[0].accumulated_phase).abs() < PI / 2.0);
        }
        prop_assert!(trace.min_visibility > DEFAULT_EPSILON);
        prop_assert_eq!(trace.nodes().count(), samples);
    }

    #[test]
    fn reversing_a_circuit_negates_winding(
        cr in -0.5f64..0.5, cd in 0.0f64..6.3, radius in 0.05f64..0.45, samples in 16usize..200,
    ) {
        let path = circle_path(SpinHalfPoint::new(cr, cd).unwrap(), radius, samples, Orientation::Ccw).unwrap();
        if let Ok(forward) = winding_number(&path, DEFAULT_EPSILON, 40) {
            let backward = winding_number(&path.reversed(), DEFAULT_EPSILON, 40).unwrap();
            prop_assert_eq!(backward.winding, -forward.winding);
        }
    }

    #[test]
    fn finer_sampling_never_changes_winding(
        cr in -0.5f64..0.5, cd in 0.0f64..6.3, radius in 0.05f64..0.45,
    ) {
        // A 16-gon cuts inside the circle by its sagitta; keep every zero
        // (0, π/2 + kπ) clear of that band so both polylines enclose the same zeros.
        let sagitta = radius * (1.0 - (PI / 16.0).cos());
        for k in -1..4 {
            let gap = (cr.hypot(cd - PI / 2.0 - k as f64 * PI) - radius).abs();
            prop_assume!(gap > 2.0 * sagitta);
        }
        let center = SpinHalfPoint::new(cr, cd).unwrap();
        let coarse = circle_path(center, radius, 16, Orientation::Ccw).unwrap();
        if let Ok(base) = winding_number(&coarse, DEFAULT_EPSILON, 20) {
            for (samples, depth) in [(16, 40), (64, 20), (256, 40)] {
                let path = circle_path(center, radius, samples, Orientation::Ccw).unwrap();
                prop_assert_eq!(winding_number(&path, DEFAULT_EPSILON, depth).unwrap().winding, base.winding);
            }
        }
    }

    #[test]
    fn contrast_and_peak_match_functional(seed in any::<u64>(), n in 2usize..9) {
        let mut g = rng(seed);
        let (u, rho) = (random_unitary(&mut g, n), random_density(&mut g, n));
        let v = interference_functional(&u, &rho, DEFAULT_EPSILON).unwrap();
        let pattern = synthesize_pattern(&u, &rho, 1024).unwrap();
        let peak = peak_shift(&pattern, DEFAULT_EPSILON);
        prop_assert!((peak.contrast - v.visibility).abs() < 1e-9);
        if peak.contrast > 1e-3 {
            let chi = peak.chi_star.unwrap();
            prop_assert!(wrap_phase(chi - v.phase.unwrap()).abs() < 1e-6);
        }
        let weight_sum: f64 = pattern.channels.iter().map(|c| c.weight).sum();
        prop_assert!((weight_sum - 1.0).abs() < 1e-10);
        let z: Complex64 = pattern.channels.iter().map(|c| Complex64::from_polar(c.weight * c.visibility, c.phase)).sum();
        prop_assert!((z - v.z).norm() < 1e-10);
        for (i, (&chi, &intensity)) in pattern.chi_grid.iter().zip(&pattern.intensity).enumerate() {
            prop_assert!(intensity >= -1e-12);
            prop_assert!((intensity - (1.0 + v.visibility * (chi - principal(v.z)).cos())).abs() < 1e-10);
            let summed: f64 = (0..pattern.channels.len()).map(|k| pattern.channels[k].intensity(chi)).sum();
            prop_assert!((summed - intensity).abs() < 1e-12, "row {}", i);
        }
    }

    #[test]
    fn eigen_reconstruction(seed in any::<u64>(), n in 1usize..9) {
        let m = random_hermitian(&mut rng(seed), n);
        let (values, vectors) = hermitian_eigen(&m).unwrap();
        let mut rebuilt = vec![Complex64::new(0.0, 0.0); n * n];
        for (lambda, v) in values.iter().zip(&vectors) {
            for i in 0..n {
                for j in 0..n {
                    rebuilt[i * n + j] += v[i] * v[j].conj() * lambda;
                }
            }
        }
        let rebuilt = ComplexMatrix::new(n, rebuilt).unwrap();
        prop_assert!(rebuilt.max_abs_diff(&m).unwrap() < 1e-10);
    }
}

fn principal(z: Complex64) -> f64 {
    z.im.atan2(z.re)
}

#[test]
fn unitary_covariance_and_global_phase() {
    let mut g = rng(7);
    for case in 0..1000 {
        let n = 2 + case % 4;
        let (u, rho, v) = (
            random_unitary(&mut g, n),
            random_density(&mut g, n),
            random_unitary(&mut g, n),
        );
        let base = interference_functional(&u, &rho, DEFAULT_EPSILON).unwrap();

        let vm = v.matrix();
        let conj = |m: &ComplexMatrix| vm.mat_mul(m).unwrap().mat_mul(&vm.adjoint()).unwrap();
        let u2 = validate_unitary(conj(u.matrix()), 1e-9).unwrap();
        let rho2 = validate_density(conj(rho.matrix()), 1e-9).unwrap();
        let rotated = interference_functional(&u2, &rho2, DEFAULT_EPSILON).unwrap();
        assert!((rotated.z - base.z).norm() < 1e-11, "case {case}");

        let alpha: f64 = 6.0 * (case as f64 / 1000.0) - 3.0;
        let shifted_u = validate_unitary(u.matrix().scale(Complex64::from_polar(1.0, alpha)), 1e-9).unwrap();
        let shifted = interference_functional(&shifted_u, &rho, DEFAULT_EPSILON).unwrap();
        assert!((shifted.visibility - base.visibility).abs() < 1e-12);
        if let (Some(a), Some(b)) = (shifted.phase, base.phase) {
            assert!(wrap_phase(a - b - alpha).abs() < 1e-12, "case {case}");
        }
    }
}

#[test]
fn mirrored_polarization_conjugates() {
    let mut g = rng(11);
    for _ in 0..1000 {
        use rand::Rng;
        let r: f64 = g.gen_range(-1.0..=1.0);
        let delta: f64 = g.gen_range(-10.0..10.0);
        let plus = spin_half_functional(SpinHalfPoint::new(r, delta).unwrap(), DEFAULT_EPSILON).z;
        let minus = spin_half_functional(SpinHalfPoint::new(-r, delta).unwrap(), DEFAULT_EPSILON).z;
        assert!((minus - plus.conj()).norm() <= 1e-15);
        let one_plus = Family::LinearSpin(Spin::new(1.0).unwrap()).value(SpinHalfPoint::new(r, delta).unwrap());
        assert!((one_plus - spin_one_closed_form(r, delta)).norm() < 1e-15);
    }
}

//! Randomized invariants over the public API.

use approx::assert_relative_eq;
use ltk_core::bridge::{feynman_kac, free_kernel, local_time_profile, sample_bridge, segment_local_time};
use ltk_core::laplace::{gaver_stehfest_invert, FnTransform, DEFAULT_ORDER};
use ltk_core::physics::{thermal_wavelength, BlochQuery, GridSpec, PhysicalParams, Potential, System, TabulatedPotential};
use ltk_core::quadrature::GaussLegendre;
use ltk_core::radial::{gaussian_bessel_closed, gaussian_bessel_quadrature, localtime_conditional_density};
use ltk_core::special::{psi_p, psi_p_iform};
use ltk_core::sturm::{green_function, solve_cauchy, wronskian};
use ltk_core::MCConfig;
use proptest::prelude::*;

fn params() -> impl Strategy<Value = PhysicalParams<f64>> {
    (0.2f64..5.0, 0.2f64..5.0).prop_map(|(m, h)| PhysicalParams::new(m, h).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wavelength_doubles_exactly_under_quadrupled_beta(p in params(), beta in 1e-3f64..1e3) {
        prop_assert_eq!(thermal_wavelength(&p, 4.0 * beta), 2.0 * thermal_wavelength(&p, beta));
    }

    #[test]
    fn tabulated_potential_hits_its_nodes(
        steps in proptest::collection::vec(0.01f64..2.0, 2..12),
        start in -10.0f64..10.0,
        seed_values in proptest::collection::vec(-50.0f64..50.0, 12),
    ) {
        let nodes: Vec<f64> = steps.iter().scan(start, |x, s| { *x += s; Some(*x) }).collect();
        let values = seed_values[..nodes.len()].to_vec();
        let tab = TabulatedPotential::new(nodes.clone(), values.clone()).unwrap();
        for (x, v) in nodes.iter().zip(&values) {
            prop_assert_eq!(tab.eval(*x), *v);
        }
    }

    #[test]
    fn segment_local_time_is_nonnegative(
        a in -3.0f64..3.0, b in -3.0f64..3.0, t in 1e-4f64..1.0, s2 in 0.1f64..4.0, u in 1e-12f64..1.0,
    ) {
        let l = segment_local_time(a, b, t, s2, u);
        prop_assert!(l >= 0.0 && l.is_finite());
    }

    #[test]
    fn gaussian_bessel_identity(a in 0.5f64..2.0, b in 0.5f64..2.0) {
        assert_relative_eq!(gaussian_bessel_quadrature(a, b).unwrap(), gaussian_bessel_closed(a, b), max_relative = 1e-10);
    }

    #[test]
    fn psi_forms_agree(p in 0.05f64..0.45, x in 0.1f64..20.0) {
        assert_relative_eq!(psi_p(p, x).unwrap(), psi_p_iform(p, x).unwrap(), max_relative = 1e-10);
    }

    #[test]
    fn gaver_stehfest_inverts_a_simple_pole(a in 0.1f64..2.0, beta in 0.2f64..5.0) {
        // order-14 truncation error reaches ~1e-4 at aβ = 2 and grows beyond
        prop_assume!(a * beta <= 2.0);
        let t = FnTransform { f: move |e: f64| 1.0 / (e + a), e_min: -a };
        let v = gaver_stehfest_invert(&t, beta, DEFAULT_ORDER).unwrap();
        assert_relative_eq!(v, (-a * beta).exp(), max_relative = 1e-4);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bridges_are_pinned_and_profiles_normalized(
        p in params(),
        x_a in -2.0f64..2.0,
        x_b in -2.0f64..2.0,
        log_slices in 3u32..11,
        beta_exp in -3i32..3,
        seed in any::<u64>(),
        index in 0u64..1000,
        width in 0.01f64..0.5,
    ) {
        let beta = 2f64.powi(beta_exp);
        let cfg = MCConfig::new(1, 1 << log_slices, seed, beta).unwrap();
        let path = sample_bridge(&p, x_a, x_b, &cfg, index);
        prop_assert_eq!(path.positions[0], x_a);
        prop_assert_eq!(*path.positions.last().unwrap(), x_b);
        let prof = local_time_profile(&path, width).unwrap();
        prop_assert!(prof.values.iter().all(|v| *v >= 0.0));
        prop_assert_eq!(prof.integral(), beta * p.hbar);
        prop_assert_eq!(sample_bridge(&p, x_a, x_b, &cfg, index).positions, path.positions);
    }

    #[test]
    fn free_estimator_has_zero_variance(p in params(), x_a in -2.0f64..2.0, x_b in -2.0f64..2.0, beta in 0.1f64..4.0, seed in any::<u64>()) {
        let sys = System::new(Potential::Free, p).unwrap();
        let cfg = MCConfig::new(64, 16, seed, beta).unwrap();
        let est = feynman_kac(&sys, &BlochQuery::new(x_a, x_b, beta).unwrap(), &cfg).unwrap().value;
        prop_assert_eq!(est.std_error, 0.0);
        assert_relative_eq!(est.mean, free_kernel(&p, x_a, x_b, beta), max_relative = 1e-14);
    }

    #[test]
    fn estimates_do_not_depend_on_thread_count(seed in any::<u64>(), threads in 2usize..5) {
        let sys = System::harmonic(1.0);
        let q = BlochQuery::new(0.3, -0.4, 1.0).unwrap();
        let cfg = MCConfig::new(200, 32, seed, 1.0).unwrap();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let many = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let a = one.install(|| feynman_kac(&sys, &q, &cfg)).unwrap().value;
        let b = many.install(|| feynman_kac(&sys, &q, &cfg)).unwrap().value;
        prop_assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        prop_assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
    }

    #[test]
    fn conditional_local_time_density_is_normalized(p in params(), beta in 0.1f64..10.0) {
        let scale = (beta / p.hbar2_over_m()).sqrt();
        let gl = GaussLegendre::<f64>::new(20);
        let norm = gl.integrate_composite(0.0, 40.0 * scale, 200, |l| localtime_conditional_density(&p, beta, l));
        assert_relative_eq!(norm, 1.0, max_relative = 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn green_function_is_symmetric(x_a in -3.0f64..3.0, x_b in -3.0f64..3.0, e in 0.2f64..4.0) {
        let sys = System::harmonic(1.0);
        let grid = GridSpec::new(-8.0, 8.0, 1601).unwrap();
        let ab = green_function(&sys, e, x_a, x_b, &grid).unwrap().value;
        let ba = green_function(&sys, e, x_b, x_a, &grid).unwrap().value;
        prop_assert!((ab - ba).abs() <= 1e-12 * ab.abs(), "{} vs {}", ab, ba);
    }

    #[test]
    fn wronskian_is_constant(e in 0.2f64..4.0, offset in 0usize..25) {
        let sys = System::harmonic(1.0);
        let grid = GridSpec::new(-6.0, 6.0, 1201).unwrap();
        let f = solve_cauchy(&sys, e, -6.0, 0.0, 1.0, &grid).unwrap();
        let g = solve_cauchy(&sys, e, 6.0, 0.0, -1.0, &grid).unwrap();
        let w: Vec<f64> = (offset..1201).step_by(25).map(|k| wronskian(&f, &g, grid.node(k))).collect();
        let mean = w.iter().sum::<f64>() / w.len() as f64;
        let sd = (w.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / w.len() as f64).sqrt();
        prop_assert!(sd / mean.abs() <= 1e-9, "{}", sd / mean.abs());
    }
}

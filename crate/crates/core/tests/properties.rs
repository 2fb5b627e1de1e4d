use bipartite_core::analytic::{gaussian_packet, packet_field, PacketParams};
use bipartite_core::entanglement::{
    brute_force_purity, purity, reduced_density, schmidt_spectrum, EntanglementReport, Thresholds,
};
use bipartite_core::fluctuations::KernelSpec;
use bipartite_core::infometrics::{fisher_rate, kl_divergence};
use bipartite_core::solver::{evolve, EvolutionSpec};
use bipartite_core::{Axis, DensityField, Error, Masses, SpatialGrid, WaveField};
use num_complex::Complex64;
use proptest::prelude::*;

fn packet() -> impl Strategy<Value = PacketParams> {
    (0.5f64..3.0, 0.6f64..1.5, -2.0f64..2.0)
        .prop_map(|(m, beta, p0)| PacketParams::with_width(m, 1.0, beta, p0).unwrap())
}

/// `psi_1(x_a) phi_1(x_b) + c psi_2(x_a) phi_2(x_b)`, normalized.
fn two_branch(grid: SpatialGrid, p: [PacketParams; 4], shift: f64, c: Complex64) -> WaveField {
    let axis = grid.axis_grid();
    let f = |q: &PacketParams, s: f64| {
        WaveField::from_fn_1d(axis, |x| gaussian_packet(q, x - s, 0.0)).unwrap()
    };
    let first = WaveField::outer(&f(&p[0], 0.0), &f(&p[1], 0.0)).unwrap();
    let second = WaveField::outer(&f(&p[2], shift), &f(&p[3], -shift))
        .unwrap()
        .scale(c);
    first.add(&second).unwrap().normalize().unwrap()
}

fn coefficient() -> impl Strategy<Value = Complex64> {
    (0.1f64..2.0, 0.0f64..std::f64::consts::TAU).prop_map(|(r, th)| Complex64::from_polar(r, th))
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 24,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn grid_spacing_covers_box(l in 0.5f64..100.0, half in 4usize..512) {
        let g = SpatialGrid::one_d(l, 2 * half).unwrap();
        prop_assert!((g.spacing() * g.points() as f64 - 2.0 * l).abs() <= 4.0 * f64::EPSILON * l);
    }

    #[test]
    fn odd_or_tiny_grids_are_rejected(l in 0.5f64..10.0, n in 0usize..8) {
        prop_assert!(SpatialGrid::one_d(l, n).is_err());
        prop_assert!(SpatialGrid::one_d(l, 2 * n + 9).is_err());
    }

    #[test]
    fn spreading_time_formula(m in 0.1f64..10.0, hbar in 0.1f64..3.0, alpha in 0.1f64..3.0) {
        let p = PacketParams::new(m, hbar, alpha, 0.0).unwrap();
        prop_assert_eq!(p.tau(), m * hbar * alpha * alpha);
    }

    #[test]
    fn kernel_variance_formula(m in 0.1f64..10.0, hbar in 0.1f64..3.0, dt in 1e-4f64..1.0) {
        let k = KernelSpec::new(m, hbar, dt).unwrap();
        prop_assert_eq!(k.variance(), hbar * dt / (2.0 * m));
    }

    #[test]
    fn density_is_nonnegative_with_unit_mass(p in packet(), t in 0.0f64..2.0) {
        let grid = SpatialGrid::one_d(p.half_width_until(t), 256).unwrap();
        let rho = packet_field(&p, grid, t).unwrap().normalize().unwrap().modulus_square();
        prop_assert!(rho.values().iter().all(|&v| v >= 0.0));
        prop_assert!((rho.mass() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn solver_conserves_norm_and_product_form(a in packet(), b in packet(), steps in 1usize..40) {
        let grid = SpatialGrid::two_d(10.0, 32).unwrap();
        let fa = packet_field(&a, grid.axis_grid(), 0.0).unwrap().normalize().unwrap();
        let fb = packet_field(&b, grid.axis_grid(), 0.0).unwrap().normalize().unwrap();
        let masses = Masses::two(a.mass(), b.mass()).unwrap();
        let probe = EvolutionSpec::free(masses, 1.0, 1.0, 1, 1);
        let dt = 0.7 / probe.max_kinetic_phase(&grid);
        let spec = EvolutionSpec::free(masses, 1.0, dt, steps, steps);
        let last = evolve(&WaveField::outer(&fa, &fb).unwrap(), &spec).unwrap().last().clone();
        prop_assert!((last.norm_sqr() - 1.0).abs() < 1e-12);
        prop_assert!(schmidt_spectrum(&last).unwrap()[1] < 1e-8);
    }

    #[test]
    fn reduced_density_is_a_state(
        a in packet(), b in packet(), c in packet(), d in packet(),
        shift in 0.0f64..3.0, k in coefficient(),
    ) {
        let psi = two_branch(SpatialGrid::two_d(8.0, 32).unwrap(), [a, b, c, d], shift, k);
        for keep in [Axis::A, Axis::B] {
            let sigma = bipartite_core::entanglement::reduced_density_of(&psi, keep).unwrap();
            let diag = sigma.diagnostics().unwrap();
            prop_assert!(diag.hermitian_error < 1e-12);
            prop_assert!((diag.trace - 1.0).abs() < 1e-10);
            prop_assert!(diag.min_eigenvalue > -1e-10);
        }
    }

    #[test]
    fn purity_bounds_and_spectrum_agree(
        a in packet(), b in packet(), c in packet(), d in packet(),
        shift in 0.0f64..3.0, k in coefficient(),
    ) {
        let psi = two_branch(SpatialGrid::two_d(8.0, 32).unwrap(), [a, b, c, d], shift, k);
        let report = EntanglementReport::new(&psi, 0.0, Thresholds::default()).unwrap();
        prop_assert!(report.purity > 0.0 && report.purity <= 1.0 + 1e-12);
        prop_assert!(report.measure >= -1e-12 && report.measure < 1.0);
        prop_assert!((report.spectral_purity() - report.purity).abs() < 1e-10);
        let sigma = reduced_density(&psi).unwrap();
        prop_assert!((purity(&sigma) - brute_force_purity(&psi).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn relative_entropy_and_fisher_are_nonnegative(p in packet(), q in packet(), t in 0.0f64..1.0) {
        let grid = SpatialGrid::one_d(12.0, 256).unwrap();
        let rp = DensityField::from_fn_1d(grid, |x| gaussian_packet(&p, x, t).norm_sqr()).unwrap().normalize().unwrap();
        let rq = DensityField::from_fn_1d(grid, |x| gaussian_packet(&q, x, t).norm_sqr()).unwrap().normalize().unwrap();
        match kl_divergence(&rp, &rq) {
            Ok(kl) => prop_assert!(kl.value >= -1e-14),
            // q vanishes where p still has mass
            Err(e) => {
                let expected = matches!(e, Error::AbsoluteContinuity { .. });
                prop_assert!(expected, "{}", e);
            }
        }
        prop_assert!(fisher_rate(&rp, Masses::one(p.mass()).unwrap(), 1.0).unwrap().value > 0.0);
    }
}

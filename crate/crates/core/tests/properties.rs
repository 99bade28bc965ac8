use consensus_lab::analysis::{
    accelerated_optimal_rate, check_mla_convergence, map_eigenvalue, map_eigenvalue_accelerated,
    mla_optimal_rate, optimal_gamma, rho_ess_mla, roots_in_unit_disk_via_halfplane,
};
use consensus_lab::sim::random_symmetric_stochastic;
use consensus_lab::spectral::{eigendecompose_symmetric, Spectrum};
use num_complex::Complex64;
use proptest::prelude::*;

/// Plain quadratic formula for `z^2 + a z + b`.
fn naive_roots(a: Complex64, b: Complex64) -> [Complex64; 2] {
    let sq = (a * a - b * 4.0).sqrt();
    [(-a + sq) / 2.0, (-a - sq) / 2.0]
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Sorted spectrum `1 > l_2 >= ... >= l_n > -1` with the dominant 1 on top.
fn spectrum_strategy() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-0.999f64..0.999, 1..8).prop_map(|mut rest| {
        rest.push(1.0);
        rest.sort_by(|a, b| b.total_cmp(a));
        rest
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn mapped_roots_solve_their_quadratics(lambda in -1.0f64..=1.0, p in -0.5f64..2.5) {
        for z in map_eigenvalue(lambda, p).roots() {
            let r = z * z - z * (p * lambda) + (p - 1.0) * lambda;
            prop_assert!(r.norm() <= 1e-12, "mla lambda={lambda} gamma={p} residual={}", r.norm());
        }
        for z in map_eigenvalue_accelerated(lambda, p).roots() {
            let r = z * z - z * (p * lambda) + (p - 1.0);
            prop_assert!(r.norm() <= 1e-12, "acc lambda={lambda} beta={p} residual={}", r.norm());
        }
    }

    #[test]
    fn halfplane_test_agrees_with_root_moduli(
        ar in -3.0f64..3.0, ai in -3.0f64..3.0, br in -3.0f64..3.0, bi in -3.0f64..3.0,
    ) {
        let (a, b) = (Complex64::new(ar, ai), Complex64::new(br, bi));
        let roots = naive_roots(a, b);
        prop_assume!(roots.iter().all(|z| (z.norm() - 1.0).abs() > 1e-10));
        let inside = roots.iter().all(|z| z.norm() < 1.0);
        prop_assert_eq!(roots_in_unit_disk_via_halfplane(a, b), inside);
    }

    #[test]
    fn optimal_rates_are_ordered(rho in 1e-6f64..0.999_999) {
        let mla = mla_optimal_rate(rho);
        let acc = accelerated_optimal_rate(rho);
        prop_assert!(mla < acc && acc < rho, "rho={rho}: {mla} {acc}");
        prop_assert!(((1.0 + rho).sqrt() - 1.0 - mla).abs() < 1e-15);
    }

    #[test]
    fn convergence_criterion_matches_spectral_radius(
        values in spectrum_strategy(), gamma in -0.5f64..2.5,
    ) {
        let spec = Spectrum::from_eigenvalues(&values);
        let ln = spec.smallest();
        let crit = 2.0 * gamma * ln - ln + 1.0;
        prop_assume!(crit.abs() > 1e-9 && gamma.abs() > 1e-9 && (gamma - 2.0).abs() > 1e-9);

        // independent: every root of every non-dominant eigenvalue, plus the
        // second root gamma - 1 of the dominant pair
        let mut radius = (gamma - 1.0).abs();
        for &l in &values[1..] {
            for z in naive_roots(c(-gamma * l), c((gamma - 1.0) * l)) {
                radius = radius.max(z.norm());
            }
        }
        prop_assume!((radius - 1.0).abs() > 1e-9);
        let v = check_mla_convergence(&spec, gamma).unwrap();
        prop_assert_eq!(v.converges, radius < 1.0, "gamma={} values={:?} radius={}", gamma, values, radius);
    }

    #[test]
    fn optimal_gamma_beats_every_other_gamma(
        rho in 0.05f64..0.95, frac in prop::collection::vec(-1.0f64..=1.0, 1..6), gamma in 0.01f64..1.99,
    ) {
        // hypotheses: l_n = -rho and every other l_i in [-rho, rho / 3]
        let mut values: Vec<f64> = frac.iter().map(|f| if *f >= 0.0 { f * rho / 3.0 } else { f * rho }).collect();
        values.push(1.0);
        values.push(-rho);
        let spec = Spectrum::from_eigenvalues(&values);
        let opt = optimal_gamma(&spec).unwrap();
        prop_assert!(opt.hypotheses_met);
        prop_assert!((rho_ess_mla(&spec, opt.gamma).unwrap() - opt.rate).abs() < 1e-12);
        if let Ok(r) = rho_ess_mla(&spec, gamma) {
            prop_assert!(opt.rate <= r + 1e-12, "gamma={gamma}: {r} < {}", opt.rate);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigendecomposition_reconstructs_matrix(n in 2usize..10, seed in any::<u64>()) {
        let a = random_symmetric_stochastic(n, seed).unwrap();
        let spec = eigendecompose_symmetric(&a).unwrap();
        for i in 0..n {
            for j in 0..n {
                let s: f64 = spec
                    .eigenvalues
                    .iter()
                    .zip(&spec.eigenvectors)
                    .map(|(l, v)| l * v[i] * v[j])
                    .sum();
                prop_assert!((s - a.get(i, j)).abs() <= 1e-9);
            }
        }
    }
}

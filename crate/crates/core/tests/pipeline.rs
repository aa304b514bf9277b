use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use boussinesq_core::adjoint::{solve_eigenfunction, DEFAULT_SAMPLES};
use boussinesq_core::config::{parse_config, render_params};
use boussinesq_core::fattorini::{uc_verdict, Verdict};
use boussinesq_core::galerkin::{assemble_mode_system, modal_input_map, singular_values};
use boussinesq_core::spectra::fd::fd_stokes_oracle;
use boussinesq_core::spectra::{dirichlet_eigenvalues, merge_spectrum, stokes_eigenvalues, Branch};
use boussinesq_core::{ChannelParams, ModeIndex, TolerancePolicy};

fn mode(k: i32) -> ModeIndex {
    ModeIndex::new(k).unwrap()
}

fn base() -> ChannelParams {
    ChannelParams::new(1.0, 0.4, PI).unwrap()
}

#[test]
fn assembled_block_oracle_and_roots_agree() {
    let p = base();
    let tol = TolerancePolicy::default();
    let k = mode(2);
    let roots = stokes_eigenvalues(k, &p, 4, &tol).unwrap();
    let oracle = fd_stokes_oracle(k, &p, 400, 4).unwrap();
    let block = assemble_mode_system(k, &p, 400, None, 1.0).unwrap().stokes_block_eigenvalues(4).unwrap();
    for i in 0..4 {
        let exact = roots[i].lambda;
        assert!(((oracle[i] - exact) / exact).abs() < 1e-3);
        assert!(((block[i] - oracle[i]) / oracle[i]).abs() < 1e-12);
    }
}

#[test]
fn observable_modes_give_a_positive_modal_gramian() {
    let p = base();
    let tol = TolerancePolicy::default();
    let spectrum = merge_spectrum(mode(1), &p, 4, 4, &tol, None).unwrap();
    let mut modes = Vec::new();
    for pt in &spectrum.points {
        let v = uc_verdict(pt, &p, &tol, DEFAULT_SAMPLES).unwrap();
        assert_eq!(v.verdict, Verdict::Observable);
        modes.push((pt.lambda, v.obs));
    }
    let sv = singular_values(&modal_input_map(&modes, 1.0, 64));
    assert!(*sv.last().unwrap() > 1e-12, "{sv:?}");
    modes[2].1 = Complex64::new(0.0, 0.0);
    let sv = singular_values(&modal_input_map(&modes, 1.0, 64));
    assert!(*sv.last().unwrap() < 1e-12);
}

#[test]
fn merged_spectrum_counts_and_order() {
    let m = merge_spectrum(mode(3), &base(), 6, 4, &TolerancePolicy::default(), None).unwrap();
    assert_eq!(m.points.len(), 10);
    assert!(m.points.windows(2).all(|w| w[0].lambda >= w[1].lambda));
    assert_eq!(m.points.iter().filter(|p| p.branch == Branch::Stokes).count(), 6);
}

#[test]
fn rendered_parameters_parse_back_exactly() {
    let p = ChannelParams::new(0.7306, 0.1 + 0.2, 2.0 * PI / 3.0).unwrap();
    let tol = TolerancePolicy::default();
    let back = parse_config(&render_params(&p, &tol)).unwrap();
    assert_eq!(back.params, p);
    assert_eq!(back.tol, tol);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn dirichlet_observation_is_exact(k in 1i32..6, alpha in 0.05f64..0.95, l in 0.5f64..6.0) {
        let p = ChannelParams::new(1.0, alpha, l).unwrap();
        for pt in dirichlet_eigenvalues(mode(k), &p, 4) {
            let e = solve_eigenfunction(&pt, &p, &TolerancePolicy::default(), 65).unwrap();
            let j = pt.j as f64;
            let want = j * PI / l * if pt.j % 2 == 0 { 1.0 } else { -1.0 };
            prop_assert!((e.obs.re - want).abs() <= 1e-13 * want.abs());
        }
    }

    #[test]
    fn stokes_eigenvalues_lie_below_the_shifted_bound(k in 1i32..5, nu in 0.2f64..3.0, l in 0.8f64..5.0) {
        let p = ChannelParams::new(nu, 0.5 * nu + 0.01, l).unwrap();
        let pts = stokes_eigenvalues(mode(k), &p, 4, &TolerancePolicy::default()).unwrap();
        let bound = -nu * (k * k) as f64;
        prop_assert!(pts.iter().all(|q| q.lambda < bound));
        prop_assert!(pts.windows(2).all(|w| w[0].lambda > w[1].lambda));
    }

    #[test]
    fn stokes_eigenfunctions_satisfy_their_equations(k in 1i32..4, alpha in 0.1f64..0.9, j in 0usize..4) {
        let p = ChannelParams::new(1.0, alpha, PI).unwrap();
        let tol = TolerancePolicy::default();
        let pt = stokes_eigenvalues(mode(k), &p, 4, &tol).unwrap()[j];
        let e = solve_eigenfunction(&pt, &p, &tol, 129).unwrap();
        prop_assert!(e.residuals.max() <= 1e-7, "{:?}", e.residuals);
    }
}

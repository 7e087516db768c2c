use gelfand_lab::criteria::{compute_c_nonmul, compute_g, script_h};
use gelfand_lab::nonlinearity::{fermi_dirac, NonlinearitySpec};
use gelfand_lab::pohozaev::pohozaev_residual;
use gelfand_lab::radial::{compute_kappa, RadialSolver};
use proptest::prelude::*;

fn cfg() -> ProptestConfig {
    ProptestConfig { cases: 32, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(cfg())]

    #[test]
    fn exponential_h_is_homogeneous(v in 1e-3f64..30.0, mu in -5.0f64..5.0, eta1 in 0.01f64..0.16) {
        let e = NonlinearitySpec::exponential();
        let h = script_h(&e, v, mu, eta1).unwrap();
        let h0 = script_h(&e, v, 0.0, eta1).unwrap();
        prop_assert!((h - mu.exp() * h0).abs() <= 1e-8 * h.abs().max(1e-300));
    }

    #[test]
    fn exponential_g_is_the_sharp_constant(mu in -20.0f64..20.0, d in 3usize..12) {
        let e = NonlinearitySpec::exponential();
        let g = compute_g(&e, mu, d).unwrap().g;
        let c = compute_c_nonmul(&e, d).unwrap();
        prop_assert!((g - c).abs() < 1e-8);
    }

    #[test]
    fn planar_branch_matches_closed_form(a in 1e-2f64..20.0) {
        let s = RadialSolver::new(NonlinearitySpec::exponential(), 2).unwrap();
        let b = (a / 2.0).exp_m1();
        let want = 8.0 * b / (1.0 + b).powi(2);
        let got = s.lambda_of(a).unwrap();
        prop_assert!((got - want).abs() <= 1e-8 * want);
    }

    #[test]
    fn solutions_satisfy_identity_and_flux(a in 1e-2f64..6.0, d in 3usize..9, which in 0usize..3) {
        let spec = match which {
            0 => NonlinearitySpec::exponential(),
            1 => NonlinearitySpec::shifted_power(3.0).unwrap(),
            _ => NonlinearitySpec::fermi(2.0).unwrap(),
        };
        let s = RadialSolver::new(spec, d).unwrap();
        let sol = s.solve_mult_local(a).unwrap();
        prop_assert!(pohozaev_residual(&sol).relative_residual < 1e-6);
        let k = compute_kappa(&sol).unwrap();
        prop_assert!((k - s.kappa_of(a).unwrap()).abs() <= 1e-7 * k);
    }

    #[test]
    fn fermi_derivative_lowers_index(delta in 1.0f64..4.0, u in -10.0f64..10.0) {
        let h = 1e-4;
        let fd = (fermi_dirac(delta, u + h).unwrap() - fermi_dirac(delta, u - h).unwrap()) / (2.0 * h);
        let want = delta * fermi_dirac(delta - 1.0, u).unwrap();
        prop_assert!((fd - want).abs() <= 1e-5 * want.max(1.0));
    }
}
